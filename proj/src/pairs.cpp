#include "reveval/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "reveval/error.hpp"
#include "parallel.hpp"
#include "reveval/random.hpp"
#include "reveval/text.hpp"

namespace reveval {

using nlohmann::json;

std::string_view to_string(PairKind k) { return k == PairKind::Gold ? "gold" : "worse"; }

namespace {

std::vector<SnippetPair> pairs_for(const Document& doc, std::size_t& skipped) {
  std::vector<SnippetPair> out;
  auto refs = edits(doc);
  std::vector<bool> located(refs.size(), false);
  for (const auto& para : paragraphs(doc)) {
    const std::string source = render(doc, para, Rendering::Source);
    for (std::size_t idx : para.edit_indices) {
      located[idx] = true;
      std::string revised = render_single(doc, para, idx);
      if (revised == source || source.empty() || revised.empty()) {
        ++skipped;
        continue;
      }
      for (const auto& label : refs[idx].edit->labels) {
        out.push_back({source, revised, label, doc.id, doc.editor, para.index, idx, PairKind::Gold});
      }
    }
  }
  skipped += static_cast<std::size_t>(std::count(located.begin(), located.end(), false));
  return out;
}

}  // namespace

ExtractionResult extract_pairs(std::span<const Document> docs, const std::set<std::string>* doc_ids, int jobs) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!doc_ids || doc_ids->count(docs[i].id)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(docs[a].id, docs[a].editor) < std::tie(docs[b].id, docs[b].editor);
  });

  std::vector<std::vector<SnippetPair>> per_doc(order.size());
  std::vector<std::size_t> skipped(order.size(), 0);
  const long n = static_cast<long>(order.size());
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_jobs(jobs))
  for (long i = 0; i < n; ++i) {
    per_doc[i] = pairs_for(docs[order[i]], skipped[i]);
  }

  ExtractionResult result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    result.skipped += skipped[i];
    std::move(per_doc[i].begin(), per_doc[i].end(), std::back_inserter(result.pairs));
  }
  return result;
}

ExtractionResult extract_paragraph_pairs(std::span<const Document> docs, const std::set<std::string>* doc_ids) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!doc_ids || doc_ids->count(docs[i].id)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(docs[a].id, docs[a].editor) < std::tie(docs[b].id, docs[b].editor);
  });
  ExtractionResult result;
  for (std::size_t i : order) {
    const auto& doc = docs[i];
    for (const auto& para : paragraphs(doc)) {
      if (para.edit_indices.empty()) continue;
      auto source = render(doc, para, Rendering::Source);
      auto revised = render(doc, para, Rendering::Revised);
      if (source == revised || source.empty() || revised.empty()) {
        ++result.skipped;
        continue;
      }
      result.pairs.push_back({std::move(source), std::move(revised), {Aspect::Other, "paragraph"}, doc.id, doc.editor,
                              para.index, para.edit_indices.front(), PairKind::Gold});
    }
  }
  return result;
}

SplitSpec split_corpus(std::span<const Document> docs, unsigned train_parts, unsigned test_parts, std::uint64_t seed) {
  if (train_parts == 0 || test_parts == 0) throw UsageError("split ratio parts must be positive");
  std::set<std::string> unique;
  for (const auto& d : docs) unique.insert(d.id);
  std::vector<std::string> ids(unique.begin(), unique.end());
  const double n = static_cast<double>(ids.size());
  const auto test_n = static_cast<std::size_t>(std::llround(n * test_parts / (train_parts + test_parts)));
  if (test_n == 0 || test_n >= ids.size()) {
    throw UsageError("split " + std::to_string(train_parts) + ":" + std::to_string(test_parts) + " is infeasible for " +
                     std::to_string(ids.size()) + " papers");
  }
  Rng rng(seed);
  rng.shuffle(ids);
  SplitSpec spec;
  spec.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    (i < test_n ? spec.test_doc_ids : spec.train_doc_ids).insert(ids[i]);
  }
  return spec;
}

std::vector<TrainingPair> export_training_pairs(std::span<const SnippetPair> pairs, double swap_fraction, std::uint64_t seed) {
  if (!(swap_fraction >= 0.0 && swap_fraction <= 1.0)) throw UsageError("swap fraction must be in [0, 1]");
  const std::size_t n = pairs.size();
  const auto swapped_n = static_cast<std::size_t>(std::llround(swap_fraction * static_cast<double>(n)));
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  std::vector<bool> swapped(n, false);
  for (std::size_t i = 0; i < swapped_n; ++i) swapped[idx[i]] = true;

  std::vector<TrainingPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    // Slot b holds the better text unless swapped.
    const std::string& better = p.revised_is_better() ? p.revised : p.source;
    const std::string& worse = p.revised_is_better() ? p.source : p.revised;
    TrainingPair t;
    t.aspect = std::string(aspect_name(p.aspect.aspect));
    if (swapped[i]) {
      t.a = better;
      t.b = worse;
      t.label = 0;
    } else {
      t.a = worse;
      t.b = better;
      t.label = 1;
    }
    out.push_back(std::move(t));
  }
  rng.shuffle(out);
  return out;
}

void write_pairs_jsonl(std::ostream& out, std::span<const SnippetPair> pairs) {
  for (const auto& p : pairs) {
    json j = {
        {"source", p.source},
        {"revised", p.revised},
        {"aspect", aspect_name(p.aspect.aspect)},
        {"raw_label", p.aspect.raw_label},
        {"doc_id", p.doc_id},
        {"editor", p.editor},
        {"paragraph_index", p.paragraph_index},
        {"edit_index", p.edit_index},
        {"kind", to_string(p.kind)},
    };
    out << j.dump() << '\n';
  }
}

std::vector<SnippetPair> read_pairs_jsonl(std::istream& in) {
  std::vector<SnippetPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      SnippetPair p;
      p.source = j.at("source").get<std::string>();
      p.revised = j.at("revised").get<std::string>();
      auto aspect = aspect_from_name(j.at("aspect").get<std::string>());
      if (!aspect) throw UsageError("unknown aspect");
      p.aspect = {*aspect, j.value("raw_label", std::string(aspect_name(*aspect)))};
      p.doc_id = j.value("doc_id", "");
      p.editor = j.value("editor", "");
      p.paragraph_index = j.value("paragraph_index", std::size_t{0});
      p.edit_index = j.value("edit_index", std::size_t{0});
      p.kind = j.value("kind", "gold") == "worse" ? PairKind::Worse : PairKind::Gold;
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw UsageError("pairs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_pairs_csv(std::ostream& out, std::span<const SnippetPair> pairs) {
  out << "doc_id,editor,paragraph_index,edit_index,aspect,raw_label,kind,source,revised\n";
  for (const auto& p : pairs) {
    out << csv_field(p.doc_id) << ',' << csv_field(p.editor) << ',' << p.paragraph_index << ',' << p.edit_index << ','
        << aspect_name(p.aspect.aspect) << ',' << csv_field(p.aspect.raw_label) << ',' << to_string(p.kind) << ','
        << csv_field(p.source) << ',' << csv_field(p.revised) << '\n';
  }
}

void write_training_jsonl(std::ostream& out, std::span<const TrainingPair> pairs) {
  for (const auto& t : pairs) {
    json j = {{"a", t.a}, {"b", t.b}, {"label", t.label}, {"aspect", t.aspect}};
    out << j.dump() << '\n';
  }
}

std::set<std::string> read_id_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open id file " + path.string());
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto id = text::trim(line);
    if (!id.empty()) ids.emplace(id);
  }
  return ids;
}

void write_id_file(const std::filesystem::path& path, const std::set<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

}  // namespace reveval
