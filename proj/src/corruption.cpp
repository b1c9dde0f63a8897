#include "reveval/corruption.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "reveval/error.hpp"
#include "reveval/io.hpp"
#include "reveval/random.hpp"
#include "reveval/text.hpp"
#include "reveval/tokenize.hpp"
#include "parallel.hpp"

namespace reveval {

namespace {

constexpr std::array<std::string_view, 3> kArticles = {"a", "an", "the"};
constexpr std::array<std::string_view, 7> kPrepositions = {"in", "on", "at", "for", "to", "of", "with"};
constexpr std::array<std::string_view, 3> kVerbSuffixes = {"ing", "ed", "s"};

// Short words that end in a verb suffix without being inflected forms.
constexpr std::array<std::string_view, 12> kSuffixStoplist = {
    "this", "thus", "was", "has", "does", "is", "its", "us", "bed", "need", "red", "thing",
};

template <std::size_t N>
long index_in(const std::array<std::string_view, N>& set, std::string_view word) {
  const auto lower = text::to_lower(word);
  for (std::size_t i = 0; i < N; ++i) {
    if (set[i] == lower) return static_cast<long>(i);
  }
  return -1;
}

bool is_word(std::string_view tok) {
  return !tok.empty() && std::isalpha(static_cast<unsigned char>(tok.front()));
}

bool is_alpha_word(std::string_view tok) {
  return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

bool starts_upper(std::string_view tok) { return !tok.empty() && std::isupper(static_cast<unsigned char>(tok.front())); }

// Copies the capitalisation pattern of `model` (lower, Capitalised, UPPER).
std::string match_case(std::string_view word, std::string_view model) {
  std::string out(word);
  if (model.size() > 1 && std::all_of(model.begin(), model.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); })) {
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (starts_upper(model) && !out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

// Returns the index of the verb suffix, or -1.
long verb_suffix(std::string_view tok) {
  if (tok.size() < 4 || !is_alpha_word(tok)) return -1;
  const auto lower = text::to_lower(tok);
  if (std::find(kSuffixStoplist.begin(), kSuffixStoplist.end(), lower) != kSuffixStoplist.end()) return -1;
  if (lower.ends_with("ing") && lower.size() >= 6) return 0;
  if (lower.ends_with("ed") && lower.size() >= 5) return 1;
  if (lower.ends_with("s") && !lower.ends_with("ss") && !lower.ends_with("us") && !lower.ends_with("is")) return 2;
  return -1;
}

std::uint64_t draw(std::uint64_t seed, NoiseRule rule, std::size_t site, std::uint64_t salt = 0) {
  return splitmix64(hash_combine(hash_combine(hash_combine(seed, static_cast<std::uint64_t>(rule) + 1), site), salt));
}

bool fires(const NoiseConfig& cfg, NoiseRule rule, std::size_t site) {
  const double rate = cfg.rate(rule);
  if (rate <= 0.0) return false;
  if (rate >= 1.0) return true;
  return unit_interval(draw(cfg.seed, rule, site)) < rate;
}

}  // namespace

std::string_view rule_name(NoiseRule r) {
  switch (r) {
    case NoiseRule::ArticleDrop: return "article_drop";
    case NoiseRule::ArticleSwap: return "article_swap";
    case NoiseRule::PrepositionSwap: return "preposition_swap";
    case NoiseRule::VerbFormPerturb: return "verb_form_perturb";
    case NoiseRule::AdjacentSwap: return "adjacent_swap";
    case NoiseRule::CommaToggle: return "comma_toggle";
  }
  return "?";
}

NoiseConfig NoiseConfig::zero() {
  NoiseConfig c;
  c.rates.fill(0.0);
  c.shuffle_doc_fraction = 0.0;
  return c;
}

NoiseConfig NoiseConfig::parse(std::string_view input) {
  NoiseConfig cfg;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(input, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("noise config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    std::size_t used = 0;
    try {
      if (key == "seed") {
        cfg.seed = std::stoull(value, &used);
      } else {
        double v = std::stod(value, &used);
        if (!(v >= 0.0 && v <= 1.0)) throw UsageError("noise config: " + key + " must be in [0, 1]");
        if (key == "shuffle_doc_fraction") {
          cfg.shuffle_doc_fraction = v;
        } else {
          auto it = std::find_if(kAllNoiseRules.begin(), kAllNoiseRules.end(), [&](NoiseRule r) { return rule_name(r) == key; });
          if (it == kAllNoiseRules.end()) throw UsageError("noise config: unknown key '" + key + "'");
          cfg.rate(*it) = v;
        }
      }
    } catch (const std::logic_error&) {
      throw UsageError("noise config line " + std::to_string(line_no) + ": bad value '" + value + "'");
    }
    if (used != value.size()) throw UsageError("noise config line " + std::to_string(line_no) + ": bad value '" + value + "'");
  }
  return cfg;
}

NoiseConfig NoiseConfig::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

ShuffleResult shuffle_sentences(std::string_view paragraph, std::uint64_t seed) {
  auto sentences = text::split_sentences(paragraph);
  if (sentences.size() < 2) return {std::string(paragraph), false};
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  bool identity = true;
  for (std::size_t i = 0; i < order.size(); ++i) identity = identity && order[i] == i;
  if (identity) std::rotate(order.begin(), order.begin() + 1, order.end());
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += ' ';
    out += sentences[order[i]];
  }
  return {std::move(out), true};
}

NoiseResult inject_noise(std::string_view paragraph, const NoiseConfig& cfg) {
  const TokenSeq seq = tokenize(paragraph);
  const auto& tok = seq.tokens;
  const std::size_t n = tok.size();
  NoiseResult res;
  std::vector<bool> touched(n, false);
  std::vector<bool> gap_blocked(n + 1, false);  // gap i sits before token i
  std::vector<EditSpan> spans;

  auto count = [&](NoiseRule r, bool applied) {
    ++res.eligible[static_cast<std::size_t>(r)];
    if (applied) ++res.applied[static_cast<std::size_t>(r)];
  };
  auto free = [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (touched[i]) return false;
    }
    return true;
  };
  auto take = [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) touched[i] = true;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (index_in(kArticles, tok[i]) < 0 || i + 1 >= n || !is_word(tok[i + 1])) continue;
    const bool apply = fires(cfg, NoiseRule::ArticleDrop, i) && free(i, i + 2);
    count(NoiseRule::ArticleDrop, apply);
    if (!apply) continue;
    if (starts_upper(tok[i]) && !starts_upper(tok[i + 1])) {
      // Keep the sentence start capitalised so the sentence splitter still sees it.
      spans.push_back({i, i + 2, match_case(tok[i + 1], "X")});
      take(i, i + 2);
      gap_blocked[i + 1] = true;
    } else {
      spans.push_back({i, i + 1, ""});
      take(i, i + 1);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const long k = index_in(kArticles, tok[i]);
    if (k < 0) continue;
    const bool apply = fires(cfg, NoiseRule::ArticleSwap, i) && free(i, i + 1);
    count(NoiseRule::ArticleSwap, apply);
    if (!apply) continue;
    const auto pick = (static_cast<std::size_t>(k) + 1 + draw(cfg.seed, NoiseRule::ArticleSwap, i, 1) % 2) % kArticles.size();
    spans.push_back({i, i + 1, match_case(kArticles[pick], tok[i])});
    take(i, i + 1);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const long k = index_in(kPrepositions, tok[i]);
    if (k < 0) continue;
    const bool apply = fires(cfg, NoiseRule::PrepositionSwap, i) && free(i, i + 1);
    count(NoiseRule::PrepositionSwap, apply);
    if (!apply) continue;
    const std::size_t m = kPrepositions.size();
    const auto pick = (static_cast<std::size_t>(k) + 1 + draw(cfg.seed, NoiseRule::PrepositionSwap, i, 1) % (m - 1)) % m;
    spans.push_back({i, i + 1, match_case(kPrepositions[pick], tok[i])});
    take(i, i + 1);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const long k = verb_suffix(tok[i]);
    if (k < 0) continue;
    const bool apply = fires(cfg, NoiseRule::VerbFormPerturb, i) && free(i, i + 1);
    count(NoiseRule::VerbFormPerturb, apply);
    if (!apply) continue;
    const auto& word = tok[i];
    const std::string stem = word.substr(0, word.size() - kVerbSuffixes[static_cast<std::size_t>(k)].size());
    const auto pick = (static_cast<std::size_t>(k) + 1 + draw(cfg.seed, NoiseRule::VerbFormPerturb, i, 1) % 2) % 3;
    std::string suffix(kVerbSuffixes[pick]);
    if (word.size() > 1 && std::isupper(static_cast<unsigned char>(word.back()))) {
      for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    spans.push_back({i, i + 1, stem + suffix});
    take(i, i + 1);
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!is_word(tok[i]) || !is_word(tok[i + 1]) || text::iequals(tok[i], tok[i + 1])) continue;
    const bool apply = fires(cfg, NoiseRule::AdjacentSwap, i) && free(i, i + 2);
    count(NoiseRule::AdjacentSwap, apply);
    if (!apply) continue;
    spans.push_back({i, i + 2, tok[i + 1] + " " + tok[i]});
    take(i, i + 2);
    gap_blocked[i + 1] = true;
  }

  // Sites: every existing comma (deleted) and every word/word gap (comma inserted).
  for (std::size_t i = 0; i < n; ++i) {
    if (tok[i] == ",") {
      const bool apply = fires(cfg, NoiseRule::CommaToggle, 2 * i) && free(i, i + 1);
      count(NoiseRule::CommaToggle, apply);
      if (apply) {
        spans.push_back({i, i + 1, ""});
        take(i, i + 1);
      }
    }
    if (i + 1 < n && is_word(tok[i]) && is_word(tok[i + 1])) {
      const bool apply = fires(cfg, NoiseRule::CommaToggle, 2 * i + 1) && !gap_blocked[i + 1];
      count(NoiseRule::CommaToggle, apply);
      if (apply) spans.push_back({i + 1, i + 1, ","});
    }
  }

  std::sort(spans.begin(), spans.end());

  // Rebuild the text: untouched tokens keep their original whitespace,
  // inserted commas attach to the preceding token, deleted tokens drop the gap
  // before them.
  struct Piece {
    std::string gap;
    std::string token;
  };
  std::vector<Piece> out;
  std::size_t s = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    while (s < spans.size() && spans[s].start == i && spans[s].is_insertion()) {
      out.push_back({"", spans[s].replacement});
      ++s;
    }
    if (i == n) break;
    if (s < spans.size() && spans[s].start == i) {
      const auto& sp = spans[s++];
      if (!sp.replacement.empty()) {
        auto words = text::split(sp.replacement, ' ');
        for (std::size_t w = 0; w < words.size(); ++w) {
          const std::size_t src = std::min(sp.start + w, sp.end - 1);
          out.push_back({seq.whitespace[src], words[w]});
        }
      }
      i = sp.end - 1;
      continue;
    }
    out.push_back({seq.whitespace[i], tok[i]});
  }
  std::string result(n > 0 ? seq.whitespace[0] : std::string());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) result += out[k].gap;
    result += out[k].token;
  }
  result += seq.whitespace.back();
  if (n == 0) result = std::string(paragraph);
  res.text = std::move(result);
  res.spans = std::move(spans);
  return res;
}

std::size_t shuffled_document_count(std::size_t papers, double fraction) {
  if (papers == 0 || fraction <= 0.0) return 0;
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(papers)));
  return std::clamp<std::size_t>(k, 1, papers);
}

WorseTestset build_worse_testset(std::span<const Document> docs, const NoiseConfig& cfg, int jobs) {
  // One document per paper: the lexicographically first editor.
  std::map<std::string, const Document*> papers;
  for (const auto& d : docs) {
    auto [it, fresh] = papers.emplace(d.id, &d);
    if (!fresh && d.editor < it->second->editor) it->second = &d;
  }
  std::vector<const Document*> chosen;
  for (const auto& [id, d] : papers) chosen.push_back(d);

  std::vector<std::size_t> order(chosen.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hash_combine(cfg.seed, fnv1a64("shuffle-docs")));
  rng.shuffle(order);
  std::vector<bool> shuffle_doc(chosen.size(), false);
  const std::size_t k = shuffled_document_count(chosen.size(), cfg.shuffle_doc_fraction);
  for (std::size_t i = 0; i < k; ++i) shuffle_doc[order[i]] = true;

  std::vector<std::vector<SnippetPair>> per_doc(chosen.size());
  std::vector<std::size_t> filtered(chosen.size(), 0);
  const long n = static_cast<long>(chosen.size());
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_jobs(jobs))
  for (long di = 0; di < n; ++di) {
    const Document& doc = *chosen[static_cast<std::size_t>(di)];
    const std::uint64_t doc_seed = hash_combine(cfg.seed, fnv1a64(doc.id));
    for (const auto& para : paragraphs(doc)) {
      const std::string source = render(doc, para, Rendering::Source);
      if (source.empty()) continue;
      NoiseConfig local = cfg;
      local.seed = hash_combine(doc_seed, para.index);
      std::string corrupted = inject_noise(source, local).text;
      bool shuffled = false;
      if (shuffle_doc[static_cast<std::size_t>(di)]) {
        auto sh = shuffle_sentences(corrupted, hash_combine(local.seed, 0x5u));
        shuffled = sh.shuffled && sh.text != corrupted;
        corrupted = std::move(sh.text);
      }
      if (corrupted == source) {
        ++filtered[static_cast<std::size_t>(di)];
        continue;
      }
      SnippetPair p;
      p.source = source;
      p.revised = std::move(corrupted);
      p.aspect = shuffled ? EditAspect{Aspect::Consistency, "sentence shuffle"} : EditAspect{Aspect::Grammaticality, "noise"};
      p.doc_id = doc.id;
      p.editor = doc.editor;
      p.paragraph_index = para.index;
      p.edit_index = 0;
      p.kind = PairKind::Worse;
      per_doc[static_cast<std::size_t>(di)].push_back(std::move(p));
    }
  }

  WorseTestset out;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (shuffle_doc[i]) out.shuffled_docs.insert(chosen[i]->id);
    out.identity_filtered += filtered[i];
    std::move(per_doc[i].begin(), per_doc[i].end(), std::back_inserter(out.pairs));
  }
  return out;
}

}  // namespace reveval
