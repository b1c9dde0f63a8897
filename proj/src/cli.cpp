#include "reveval/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "reveval/agreement.hpp"
#include "reveval/corpus.hpp"
#include "reveval/corruption.hpp"
#include "reveval/error.hpp"
#include "reveval/gleu.hpp"
#include "reveval/io.hpp"
#include "reveval/irc.hpp"
#include "reveval/max_match.hpp"
#include "reveval/metric.hpp"
#include "reveval/ngram_lm.hpp"
#include "reveval/pairs.hpp"
#include "reveval/text.hpp"
#include "reveval/tokenize.hpp"

namespace reveval::cli {

using nlohmann::json;

namespace {

struct Common {
  int jobs = 0;
  int verbose = 0;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

struct Session {
  std::ostream& out;
  std::ostream& err;
  Common common;

  void note(const std::string& msg) const { err << "reveval: " << msg << "\n"; }
  void info(const std::string& msg) const {
    if (common.verbose > 0) err << "reveval: " << msg << "\n";
  }
  void seed_notice() const {
    if (common.seed_opt && common.seed_opt->count() == 0) note("no --seed given; using seed 0");
  }
};

void add_jobs(CLI::App* sub, Common& c) {
  sub->add_option("--jobs,-j", c.jobs, "Worker threads (default: all logical cores)")->check(CLI::NonNegativeNumber);
  sub->add_flag("--verbose,-v", c.verbose, "Log progress to stderr");
}

void add_seed(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed (default 0)");
}

// Writes `content` to `path` atomically, or to `out` when path is empty or "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") out << content;
  else io::write_file_atomic(path, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ParseOptions parse_options(const std::string& labels_path) {
  ParseOptions opts;
  if (!labels_path.empty()) opts.labels = LabelMap::from_file(labels_path);
  return opts;
}

std::vector<Document> load(const std::string& corpus, const std::string& labels, const Session& s) {
  auto docs = parse_corpus(corpus, parse_options(labels), s.common.jobs);
  s.info("loaded " + std::to_string(docs.size()) + " documents from " + corpus);
  return docs;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// ---- corpus-derived reference instances (gleu, mm-score) ----

struct RefInstances {
  std::vector<std::vector<std::string>> sources;
  std::vector<std::vector<std::string>> hypotheses;
  std::vector<std::vector<std::vector<std::string>>> references;
  std::vector<std::string> labels;  // "paper#paragraph"
  std::size_t skipped = 0;
};

// Source paragraphs are matched across editors by their source text.
RefInstances corpus_instances(std::span<const Document> docs, const std::string& system) {
  std::map<std::string, std::map<std::string, const Document*>> papers;
  for (const auto& d : docs) papers[d.id][d.editor] = &d;

  std::string system_editor;
  std::optional<std::vector<std::string>> system_lines;
  if (system.rfind("editor:", 0) == 0) system_editor = system.substr(7);
  else if (system.rfind("file:", 0) == 0) system_lines = read_lines(system.substr(5));
  else if (system != "source") throw UsageError("--system must be source, editor:NAME or file:PATH");

  RefInstances inst;
  std::size_t line = 0;
  for (const auto& [id, editors] : papers) {
    std::map<std::string, std::map<std::string, std::string>> revised;  // editor -> source -> revised
    for (const auto& [name, doc] : editors) {
      for (const auto& para : paragraphs(*doc)) {
        revised[name].emplace(render(*doc, para, Rendering::Source), render(*doc, para, Rendering::Revised));
      }
    }
    const Document& base = *editors.begin()->second;
    for (const auto& para : paragraphs(base)) {
      const std::string src = render(base, para, Rendering::Source);
      if (src.empty()) continue;
      std::vector<std::vector<std::string>> refs;
      for (const auto& [name, table] : revised) {
        if (name == system_editor) continue;
        auto it = table.find(src);
        if (it != table.end()) refs.push_back(tokenize_words(it->second));
      }
      std::optional<std::string> hyp;
      if (system_lines) {
        if (line >= system_lines->size()) throw UsageError("system file has fewer lines than corpus paragraphs");
        hyp = (*system_lines)[line++];
      } else if (!system_editor.empty()) {
        auto ed = revised.find(system_editor);
        if (ed != revised.end()) {
          auto it = ed->second.find(src);
          if (it != ed->second.end()) hyp = it->second;
        }
      } else {
        hyp = src;
      }
      if (refs.empty() || !hyp) {
        ++inst.skipped;
        continue;
      }
      inst.sources.push_back(tokenize_words(src));
      inst.hypotheses.push_back(tokenize_words(*hyp));
      inst.references.push_back(std::move(refs));
      inst.labels.push_back(id + "#" + std::to_string(para.index));
    }
  }
  if (system_lines && line != system_lines->size()) throw UsageError("system file has more lines than corpus paragraphs");
  if (!system_editor.empty() && inst.sources.empty()) throw UsageError("editor '" + system_editor + "' not found in corpus");
  return inst;
}

RefInstances text_instances(const std::string& source, const std::string& hyp, const std::vector<std::string>& refs) {
  if (source.empty() || hyp.empty() || refs.empty()) {
    throw UsageError("give either --corpus or all of --source, --hyp and --ref");
  }
  RefInstances inst;
  auto src = read_lines(source);
  auto hy = read_lines(hyp);
  std::vector<std::vector<std::string>> ref_lines;
  for (const auto& r : refs) ref_lines.push_back(read_lines(r));
  if (hy.size() != src.size()) throw UsageError("--hyp and --source differ in line count");
  for (const auto& r : ref_lines) {
    if (r.size() != src.size()) throw UsageError("a --ref file differs in line count from --source");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    inst.sources.push_back(tokenize_words(src[i]));
    inst.hypotheses.push_back(tokenize_words(hy[i]));
    std::vector<std::vector<std::string>> rs;
    for (const auto& r : ref_lines) rs.push_back(tokenize_words(r[i]));
    inst.references.push_back(std::move(rs));
    inst.labels.push_back("line " + std::to_string(i + 1));
  }
  return inst;
}

std::vector<std::vector<std::string>> lm_sentences_from_text(const std::string& content) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    for (auto& s : sentence_tokens(line)) out.push_back(std::move(s));
  }
  return out;
}

std::string stats_table(const CorpusStats& st) {
  std::ostringstream o;
  o << "documents " << st.documents << ", edits " << st.edits << ", label occurrences " << st.label_occurrences << "\n";
  char buf[128];
  for (Aspect a : kAllAspects) {
    const auto i = static_cast<std::size_t>(a);
    std::snprintf(buf, sizeof buf, "%-15s %6zu  %5.1f%%\n", std::string(aspect_name(a)).c_str(), st.counts[i], st.percent[i]);
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "beyond-GEC     %6.1f%%\n", 100.0 * st.beyond_gec_ratio);
  o << buf;
  return o.str();
}

json stats_json(const CorpusStats& st) {
  json aspects = json::object();
  for (Aspect a : kAllAspects) {
    const auto i = static_cast<std::size_t>(a);
    aspects[std::string(aspect_name(a))] = {{"count", st.counts[i]}, {"percent", st.percent[i]}};
  }
  json breakdown = json::object();
  for (const auto& [key, counts] : st.breakdown) {
    json row = json::object();
    for (Aspect a : kAllAspects) row[std::string(aspect_name(a))] = counts[static_cast<std::size_t>(a)];
    breakdown[key] = std::move(row);
  }
  return {{"documents", st.documents},
          {"edits", st.edits},
          {"label_occurrences", st.label_occurrences},
          {"aspects", std::move(aspects)},
          {"beyond_gec_ratio", st.beyond_gec_ratio},
          {"breakdown", std::move(breakdown)}};
}

std::pair<unsigned, unsigned> parse_ratio(const std::string& ratio) {
  auto parts = text::split(ratio, ':');
  try {
    if (parts.size() == 2) {
      std::size_t u1 = 0, u2 = 0;
      unsigned long a = std::stoul(parts[0], &u1), b = std::stoul(parts[1], &u2);
      if (u1 == parts[0].size() && u2 == parts[1].size() && a > 0 && b > 0) return {static_cast<unsigned>(a), static_cast<unsigned>(b)};
    }
  } catch (const std::logic_error&) {
  }
  throw UsageError("--ratio must look like 3:1");
}

// One CLI::App per call; handlers are bound to `session` and run after parsing.
struct Program {
  CLI::App app{"Document revision evaluation toolkit", "reveval"};
  std::function<int()> handler;
};

void build(Program& prog, Session& s) {
  auto& app = prog.app;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // Shared option storage; each subcommand uses the parts it declares.
  struct Opts {
    std::string corpus, labels, out, split, csv, config, metric, pairs_file, write_split, ratio = "3:1", training_out,
        train_split, system = "source", source, hyp, model, text_file;
    std::vector<std::string> refs, texts;
    double swap_fraction = 0.5, tie_epsilon = 0.0;
    int iterations = 500, max_n = 4, order = 3, resamples = 1000;
    std::uint64_t min_count = 1;
    std::size_t batch_size = 64;
    bool raw_labels = false;
  };
  auto o = std::make_shared<Opts>();

  auto corpus_opt = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--corpus", o->corpus, "Corpus directory or single XML file");
    if (required) opt->required();
    sub->add_option("--labels", o->labels, "Label map file (label = Aspect per line)");
  };

  {
    auto* sub = app.add_subcommand("validate", "Parse a corpus and report every malformed file");
    corpus_opt(sub, true);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto loaded = load_corpus(o->corpus, parse_options(o->labels), s.common.jobs);
        for (const auto& e : loaded.errors) s.err << e << "\n";
        std::size_t n_edits = 0;
        for (const auto& d : loaded.documents) n_edits += edits(d).size();
        s.out << loaded.documents.size() << " documents, " << n_edits << " edits, " << loaded.errors.size()
              << " invalid files\n";
        return loaded.errors.empty() ? kOk : kValidation;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("stats", "Aspect distribution and beyond-GEC ratio");
    corpus_opt(sub, true);
    sub->add_option("--out,-o", o->out, "Write JSON statistics to this file");
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto docs = load(o->corpus, o->labels, s);
        if (docs.empty()) throw UsageError("corpus is empty");
        auto st = corpus_stats(docs);
        s.out << stats_table(st);
        if (!o->out.empty()) emit(o->out, dump(stats_json(st)), s.out);
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("pairs", "Extract single-edit snippet pairs");
    corpus_opt(sub, true);
    sub->add_option("--split", o->split, "Only use papers listed in this id file");
    sub->add_option("--out,-o", o->out, "Pairs as JSON lines (default: stdout)");
    sub->add_option("--csv", o->csv, "Also write pairs as CSV");
    sub->add_option("--write-split", o->write_split, "Make a paper-level split and write PREFIX.train.ids / PREFIX.test.ids");
    sub->add_option("--ratio", o->ratio, "Train:test ratio for --write-split")->capture_default_str();
    sub->add_option("--training-out", o->training_out, "Write paragraph-level training pairs (JSON lines)");
    sub->add_option("--train-split", o->train_split, "Id file restricting --training-out");
    sub->add_option("--swap-fraction", o->swap_fraction, "Share of training pairs with the revision in slot a")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_seed(sub, s.common);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto docs = load(o->corpus, o->labels, s);
        std::optional<std::set<std::string>> test_ids, train_ids;
        if (!o->split.empty()) test_ids = read_id_file(o->split);
        if (!o->train_split.empty()) train_ids = read_id_file(o->train_split);
        if (!o->write_split.empty() || !o->training_out.empty()) s.seed_notice();
        if (!o->write_split.empty()) {
          auto [tr, te] = parse_ratio(o->ratio);
          auto split = split_corpus(docs, tr, te, s.common.seed);
          write_id_file(o->write_split + ".train.ids", split.train_doc_ids);
          write_id_file(o->write_split + ".test.ids", split.test_doc_ids);
          s.info("split: " + std::to_string(split.train_doc_ids.size()) + " train / " +
                 std::to_string(split.test_doc_ids.size()) + " test papers");
          if (!test_ids) test_ids = split.test_doc_ids;
          if (!train_ids) train_ids = split.train_doc_ids;
        }
        auto result = extract_pairs(docs, test_ids ? &*test_ids : nullptr, s.common.jobs);
        if (result.skipped) s.note(std::to_string(result.skipped) + " edit(s) skipped (no change at paragraph level)");
        std::ostringstream jl;
        write_pairs_jsonl(jl, result.pairs);
        emit(o->out, jl.str(), s.out);
        if (!o->csv.empty()) {
          std::ostringstream c;
          write_pairs_csv(c, result.pairs);
          io::write_file_atomic(o->csv, c.str());
        }
        if (!o->training_out.empty()) {
          auto para = extract_paragraph_pairs(docs, train_ids ? &*train_ids : nullptr);
          auto training = export_training_pairs(para.pairs, o->swap_fraction, s.common.seed);
          std::ostringstream t;
          write_training_jsonl(t, training);
          io::write_file_atomic(o->training_out, t.str());
          s.info(std::to_string(training.size()) + " training pairs");
        }
        s.info(std::to_string(result.pairs.size()) + " snippet pairs");
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("corrupt", "Build a worse-quality test set (source is the better side)");
    corpus_opt(sub, true);
    sub->add_option("--config", o->config, "Noise config (key = value lines)");
    sub->add_option("--split", o->split, "Only use papers listed in this id file");
    sub->add_option("--out,-o", o->out, "Pairs as JSON lines (default: stdout)");
    add_seed(sub, s.common);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto docs = load(o->corpus, o->labels, s);
        if (!o->split.empty()) {
          auto ids = read_id_file(o->split);
          std::erase_if(docs, [&](const Document& d) { return !ids.count(d.id); });
        }
        NoiseConfig cfg = o->config.empty() ? NoiseConfig{} : NoiseConfig::load(o->config);
        if (s.common.seed_opt && s.common.seed_opt->count() > 0) cfg.seed = s.common.seed;
        else if (o->config.empty()) s.seed_notice();
        else s.note("no --seed given; using the config seed " + std::to_string(cfg.seed));
        auto set = build_worse_testset(docs, cfg, s.common.jobs);
        std::ostringstream jl;
        write_pairs_jsonl(jl, set.pairs);
        emit(o->out, jl.str(), s.out);
        s.info(std::to_string(set.pairs.size()) + " pairs, " + std::to_string(set.shuffled_docs.size()) +
               " shuffled documents, " + std::to_string(set.identity_filtered) + " unchanged paragraphs dropped");
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("eval", "Revision classification accuracy of a metric");
    corpus_opt(sub, false);
    sub->add_option("--pairs", o->pairs_file, "Read pairs from JSON lines instead of extracting them");
    sub->add_option("--metric,-m", o->metric,
                    "native-ppl:<model>, adapter:<command>, adapter (uses REVEVAL_ADAPTER), oracle, oracle-inverted, random:<seed>")
        ->required();
    sub->add_option("--split", o->split, "Only use papers listed in this id file");
    sub->add_option("--out,-o", o->out, "Write the JSON report here");
    sub->add_option("--csv", o->csv, "Write the per-aspect table as CSV");
    sub->add_option("--tie-epsilon", o->tie_epsilon, "Score difference treated as a tie")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--batch-size", o->batch_size, "Pairs per metric request batch")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--resamples", o->resamples, "Bootstrap resamples for confidence intervals")->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(sub, s.common);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        if (o->corpus.empty() == o->pairs_file.empty()) throw UsageError("eval needs exactly one of --corpus or --pairs");
        s.seed_notice();
        std::vector<SnippetPair> pairs;
        std::optional<std::set<std::string>> ids;
        if (!o->split.empty()) ids = read_id_file(o->split);
        if (!o->pairs_file.empty()) {
          std::ifstream in(o->pairs_file);
          if (!in) throw UsageError("cannot open " + o->pairs_file);
          pairs = read_pairs_jsonl(in);
          if (ids) std::erase_if(pairs, [&](const SnippetPair& p) { return !ids->count(p.doc_id); });
        } else {
          auto docs = load(o->corpus, o->labels, s);
          pairs = extract_pairs(docs, ids ? &*ids : nullptr, s.common.jobs).pairs;
        }
        if (pairs.empty()) throw UsageError("no pairs to evaluate");
        const char* env = std::getenv("REVEVAL_ADAPTER");
        auto spec = parse_metric_spec(o->metric, env ? std::optional<std::string>(env) : std::nullopt);
        spec.tie_epsilon = o->tie_epsilon;
        MetricFactory factory(spec, pairs);
        EvalOptions eo;
        eo.seed = s.common.seed;
        eo.jobs = s.common.jobs;
        eo.batch_size = o->batch_size;
        eo.bootstrap_resamples = o->resamples;
        auto report = evaluate_metric(factory, pairs, eo);
        auto rows = per_aspect_report(report);
        s.out << "metric " << report.metric_id << ", " << report.n << " pairs, tie rate " << report.tie_rate
              << ", errors " << report.error_count << "\n"
              << render_text(rows);
        if (!o->out.empty()) emit(o->out, dump(to_json(report)), s.out);
        if (!o->csv.empty()) io::write_file_atomic(o->csv, render_csv(rows));
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("agree", "Detection and correction agreement between editors");
    corpus_opt(sub, true);
    sub->add_option("--out,-o", o->out, "Write the JSON report here");
    sub->add_flag("--raw-labels", o->raw_labels, "Compare raw type labels instead of aspects");
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto docs = load(o->corpus, o->labels, s);
        AgreementOptions ao;
        ao.raw_labels = o->raw_labels;
        ao.jobs = s.common.jobs;
        auto rep = compute_agreement(docs, ao);
        char buf[160];
        for (const auto& [name, summary] : {std::pair{"detection", rep.detection}, std::pair{"correction", rep.correction}}) {
          if (summary) {
            std::snprintf(buf, sizeof buf, "%-10s avg %.3f  min %.3f  max %.3f\n", name, summary->avg, summary->min, summary->max);
          } else {
            std::snprintf(buf, sizeof buf, "%-10s n/a\n", name);
          }
          s.out << buf;
        }
        if (!o->out.empty()) emit(o->out, dump(to_json(rep)), s.out);
        return kOk;
      };
    });
  }

  auto reference_inputs = [&](CLI::App* sub) {
    corpus_opt(sub, false);
    sub->add_option("--system", o->system, "Hypothesis with --corpus: source, editor:NAME or file:PATH")->capture_default_str();
    sub->add_option("--source", o->source, "Source paragraphs, one per line");
    sub->add_option("--hyp", o->hyp, "Hypothesis paragraphs, one per line");
    sub->add_option("--ref", o->refs, "Reference file, one paragraph per line (repeatable)");
    sub->add_option("--out,-o", o->out, "Write JSON here (default: stdout)");
  };
  auto instances = [&s, o]() {
    if (!o->corpus.empty()) {
      auto docs = load(o->corpus, o->labels, s);
      auto inst = corpus_instances(docs, o->system);
      if (inst.skipped) s.note(std::to_string(inst.skipped) + " paragraph(s) without references skipped");
      return inst;
    }
    return text_instances(o->source, o->hyp, o->refs);
  };
  {
    auto* sub = app.add_subcommand("gleu", "Sampled multi-reference GLEU");
    reference_inputs(sub);
    sub->add_option("--iterations", o->iterations, "Reference sampling iterations")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-n", o->max_n, "Highest n-gram order")->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(sub, s.common);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o, instances] {
      prog.handler = [&s, o, instances] {
        s.seed_notice();
        auto inst = instances();
        GleuConfig cfg;
        cfg.iterations = o->iterations;
        cfg.max_n = o->max_n;
        cfg.seed = s.common.seed;
        auto res = gleu_corpus(inst.sources, inst.hypotheses, inst.references, cfg, s.common.jobs);
        if (res.empty_hypotheses) s.note(std::to_string(res.empty_hypotheses) + " empty hypothesis instance(s)");
        json per = json::array();
        for (std::size_t i = 0; i < res.per_instance.size(); ++i) per.push_back({{"id", inst.labels[i]}, {"score", res.per_instance[i]}});
        emit(o->out,
             dump({{"score", res.score},
                   {"iterations", cfg.iterations},
                   {"max_n", cfg.max_n},
                   {"seed", cfg.seed},
                   {"instances", inst.sources.size()},
                   {"per_instance", std::move(per)}}),
             s.out);
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("mm-score", "Span-level max-match precision, recall and F0.5");
    reference_inputs(sub);
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o, instances] {
      prog.handler = [&s, o, instances] {
        auto inst = instances();
        auto res = max_match_f05(inst.sources, inst.hypotheses, inst.references);
        json per = json::array();
        for (std::size_t i = 0; i < res.per_instance_f05.size(); ++i) {
          per.push_back({{"id", inst.labels[i]}, {"f05", res.per_instance_f05[i]}, {"annotator", res.chosen_annotator[i]}});
        }
        emit(o->out,
             dump({{"precision", res.precision},
                   {"recall", res.recall},
                   {"f05", res.f05},
                   {"tp", res.tp},
                   {"fp", res.fp},
                   {"fn", res.fn},
                   {"instances", inst.sources.size()},
                   {"per_instance", std::move(per)}}),
             s.out);
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("lm-train", "Fit a Kneser-Ney n-gram model");
    sub->add_option("--text", o->texts, "Plain-text training file, one paragraph per line (repeatable)");
    corpus_opt(sub, false);
    sub->add_option("--order", o->order, "N-gram order")->check(CLI::Range(1, 16))->capture_default_str();
    sub->add_option("--min-count", o->min_count, "Words seen fewer times become <unk>")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out,-o", o->out, "Model file (NGLM1)")->required();
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        std::vector<std::vector<std::string>> sentences;
        for (const auto& t : o->texts) {
          for (auto& sent : lm_sentences_from_text(io::read_file(t))) sentences.push_back(std::move(sent));
        }
        if (!o->corpus.empty()) {
          std::set<std::string> seen;
          for (const auto& d : load(o->corpus, o->labels, s)) {
            if (!seen.insert(d.id).second) continue;
            for (const auto& para : paragraphs(d)) {
              for (auto& sent : sentence_tokens(render(d, para, Rendering::Source))) sentences.push_back(std::move(sent));
            }
          }
        }
        if (o->texts.empty() && o->corpus.empty()) throw UsageError("lm-train needs --text or --corpus");
        NgramOptions no;
        no.order = o->order;
        no.min_count = o->min_count;
        auto model = NgramModel::fit(sentences, no);
        std::ostringstream bytes;
        model.save(bytes);
        io::write_file_atomic(o->out, bytes.str());
        s.info("trained order-" + std::to_string(model.order()) + " model on " + std::to_string(sentences.size()) +
               " sentences, vocabulary " + std::to_string(model.vocabulary_size()));
        return kOk;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("lm-ppl", "Per-word perplexity of text under a model");
    sub->add_option("--model", o->model, "Model file (NGLM1)")->required();
    sub->add_option("--text", o->text_file, "Text file, one paragraph per line")->required();
    sub->add_option("--out,-o", o->out, "Write JSON here (default: stdout)");
    add_jobs(sub, s.common);
    sub->callback([&prog, &s, o] {
      prog.handler = [&s, o] {
        auto model = NgramModel::load_file(o->model);
        auto lines = read_lines(o->text_file);
        json per = json::array();
        std::vector<std::vector<std::string>> all;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          auto sents = sentence_tokens(lines[i]);
          if (sents.empty()) continue;
          per.push_back({{"line", i + 1}, {"perplexity", model.perplexity(sents)}});
          for (auto& x : sents) all.push_back(std::move(x));
        }
        if (all.empty()) throw UsageError("no text to score in " + o->text_file);
        emit(o->out, dump({{"perplexity", model.perplexity(all)}, {"lines", per.size()}, {"per_line", std::move(per)}}),
             s.out);
        return kOk;
      };
    });
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("reveval");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Session session{out, err, {}};
  Program prog;
  build(prog, session);
  try {
    prog.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return prog.app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return prog.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    prog.app.exit(e, err, err);
    return kUsage;
  }
  if (!prog.handler) return kUsage;
  for (auto* sub : prog.app.get_subcommands()) session.common.seed_opt = sub->get_option_no_throw("--seed");
  try {
    return prog.handler();
  } catch (const UsageError& e) {
    err << "reveval: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    // Parse, schema, validation, metric and I/O failures.
    err << "reveval: " << e.what() << "\n";
    return kValidation;
  }
}

std::map<std::string, std::set<std::string>> flag_table() {
  std::ostringstream sink;
  Session session{sink, sink, {}};
  Program prog;
  build(prog, session);
  std::map<std::string, std::set<std::string>> table;
  for (auto* sub : prog.app.get_subcommands([](CLI::App*) { return true; })) {
    auto& flags = table[sub->get_name()];
    for (const auto* opt : sub->get_options()) {
      for (const auto& l : opt->get_lnames()) {
        if (l != "help" && l != "help-all") flags.insert(l);
      }
    }
  }
  return table;
}

}  // namespace reveval::cli
