// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any failed.
// Checks that need the released corpus print SKIP unless TETRA_DIR points
// at it (a directory of annotated XML files).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "alignment_oracle.hpp"
#include "fixture_expect.hpp"
#include "gleu_oracle.hpp"
#include "reveval/agreement.hpp"
#include "reveval/alignment.hpp"
#include "reveval/corpus.hpp"
#include "reveval/corruption.hpp"
#include "reveval/gleu.hpp"
#include "reveval/irc.hpp"
#include "reveval/max_match.hpp"
#include "reveval/metric.hpp"
#include "reveval/ngram_lm.hpp"
#include "reveval/pairs.hpp"
#include "reveval/random.hpp"
#include "reveval/tokenize.hpp"
#include "test_support.hpp"

using namespace reveval;
namespace ts = testing_support;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome fixture_round_trip() {
  const auto t0 = Clock::now();
  auto docs = parse_corpus(ts::fixture_dir() / "corpus");
  if (docs.size() != 3) return fail("expected 3 documents, got " + std::to_string(docs.size()));
  for (const auto& d : docs) {
    auto again = parse_document(serialize(d), "round-trip");
    if (!(again == d)) return fail("document " + d.id + "/" + d.editor + " changed after serialize + parse");
  }
  const std::string p01 = std::string(fixture::kP01AbstractSource) + "\n\n" + std::string(fixture::kP01IntroSource);
  const bool texts = source_text(docs[0]) == p01 && source_text(docs[1]) == p01 &&
                     revised_text(docs[0]) == std::string(fixture::kP01ARevisedAbstract) + "\n\n" +
                                                  std::string(fixture::kP01ARevisedIntro) &&
                     revised_text(docs[1]) == std::string(fixture::kP01BRevisedAbstract) + "\n\n" +
                                                  std::string(fixture::kP01BRevisedIntro) &&
                     source_text(docs[2]) == fixture::kP02Source && revised_text(docs[2]) == fixture::kP02Revised;
  if (!texts) return fail("materialized text differs from the expected strings");
  const double secs = seconds_since(t0);
  return verdict(secs < 1.0, fmt("3 documents, %.3f s", secs));
}

Outcome pair_counting() {
  auto docs = parse_corpus(ts::fixture_dir() / "corpus");
  auto res = extract_pairs(docs);
  if (res.pairs.size() != fixture::kPairCount) {
    return fail("pairs " + std::to_string(res.pairs.size()) + ", expected " + std::to_string(fixture::kPairCount));
  }
  auto [s, r] = apply_single_edit(docs[0], 2);
  auto [s2, r2] = apply_single_edit(docs[2], 2);
  const bool bytes = s == fixture::kP01ADeletionSource && r == fixture::kP01ADeletionRevised &&
                     s2 == fixture::kP02InsertionSource && r2 == fixture::kP02InsertionRevised;
  return verdict(bytes, std::to_string(res.pairs.size()) + " pairs; single-edit text " + (bytes ? "matches" : "differs"));
}

std::vector<SnippetPair> synthetic_pairs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SnippetPair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].doc_id = "S" + std::to_string(i);
    out[i].editor = "synthetic";
    out[i].source = "draft " + std::to_string(rng.next());
    out[i].revised = "edited " + std::to_string(rng.next());
    out[i].aspect.aspect = kAllAspects[rng.below(kAspectCount)];
  }
  return out;
}

Outcome irc_calibration() {
  auto pairs = synthetic_pairs(2000, 17);
  EvalOptions o;
  o.seed = 5;
  auto acc = [&](const std::string& spec) {
    return evaluate_metric(MetricFactory(parse_metric_spec(spec), pairs), pairs, o).overall_accuracy;
  };
  const double oracle = acc("oracle"), inverted = acc("oracle-inverted"), random = acc("random:23");

  auto anti_pairs = synthetic_pairs(1000, 18);
  std::size_t violations = 0;
  for (const char* spec : {"random:23", "oracle"}) {
    auto m = MetricFactory(parse_metric_spec(spec), anti_pairs).create();
    for (const auto& p : anti_pairs) {
      if (m->choose(p.source, p.revised).choice != mirror(m->choose(p.revised, p.source).choice)) ++violations;
    }
  }
  const bool ok = oracle == 1.0 && inverted == 0.0 && std::fabs(random - 0.5) <= 0.05 && violations == 0;
  return verdict(ok, fmt("oracle %.3f, inverted %.3f, random %.3f on 2000 pairs", oracle, inverted, random) +
                         ", antisymmetry violations " + std::to_string(violations));
}

std::vector<std::string> words(const char* s) { return tokenize_words(s); }

// Twenty small instances written out by hand: source, system output, references.
std::vector<GleuInstance> gleu_instances() {
  struct Raw {
    const char* src;
    const char* hyp;
    std::vector<const char*> refs;
  };
  const std::vector<Raw> raw = {
      {"He go to school .", "He goes to school .", {"He goes to school .", "He went to school ."}},
      {"She have two cat .", "She has two cat .", {"She has two cats .", "She had two cats ."}},
      {"I am agree with you .", "I agree with you .", {"I agree with you .", "I am in agreement with you ."}},
      {"The datas is large .", "The data is large .", {"The data are large .", "The data is large ."}},
      {"We discussed about it .", "We discussed about it .", {"We discussed it .", "We talked about it ."}},
      {"a b c d", "a b c d", {"a b c d"}},
      {"a b c d", "a x c d", {"a b c d", "a y c d"}},
      {"results shows that", "results show that", {"results show that", "the results show that"}},
      {"In this paper we propose", "In this paper , we propose", {"In this paper , we propose", "Here we propose"}},
      {"It is very very good", "It is very good", {"It is very good", "It is excellent"}},
      {"the the model", "the model", {"the model", "our model"}},
      {"Despite of the rain", "Despite the rain", {"Despite the rain", "In spite of the rain"}},
      {"He said that he will come", "He said that he would come", {"He said he would come"}},
      {"informations are useful", "information is useful", {"information is useful", "the information is useful"}},
      {"x", "y", {"z", "x"}},
      {"one two three four five", "one two four three five", {"one two three four five", "one three two four five"}},
      {"they was happy", "they were happy", {"they were happy", "they were glad", "they felt happy"}},
      {"Figure 3 show results", "Figure 3 shows the results", {"Figure 3 shows results", "Figure 3 shows the results"}},
      {"this approach outperform", "this approach outperforms", {"this approach outperforms others"}},
      {"we use a LSTM", "we use an LSTM", {"we use an LSTM", "an LSTM is used"}},
  };
  std::vector<GleuInstance> out;
  for (const auto& r : raw) {
    GleuInstance g{words(r.src), words(r.hyp), {}};
    for (const char* ref : r.refs) g.references.push_back(words(ref));
    out.push_back(std::move(g));
  }
  return out;
}

Outcome gleu_equivalence() {
  auto inst = gleu_instances();
  std::vector<oracle::Instance> od;
  for (const auto& g : inst) od.push_back({g.source, g.hypothesis, g.references});
  GleuConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 31;
  auto res = gleu_corpus(inst, cfg, 4);
  // Reference draws follow the documented rule: one generator seeded with
  // the seed, one draw per (iteration, instance) in that order.
  Rng rng(cfg.seed);
  double worst = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<std::size_t> choice;
    for (const auto& g : inst) choice.push_back(static_cast<std::size_t>(rng.below(g.references.size())));
    worst = std::max(worst, std::fabs(res.iteration_scores[static_cast<std::size_t>(it)] - oracle::gleu(od, choice, cfg.max_n)));
  }
  std::vector<GleuInstance> same;
  for (const auto& g : inst) same.push_back({g.source, g.source, {g.source}});
  const double identity = gleu_corpus(same, cfg).score;
  return verdict(worst <= 1e-9 && identity == 100.0,
                 fmt("20 instances x 200 iterations, max |diff| %.2e; identity score %.1f", worst, identity));
}

Outcome alignment_soundness() {
  Rng rng(2718);
  static const std::vector<std::string> vocab = {"a", "b", "c", "A", "the", "The", "of", ",", ".", "dog"};
  auto draw = [&] {
    std::vector<std::string> t(rng.below(13));
    for (auto& w : t) w = vocab[rng.below(vocab.size())];
    return t;
  };
  std::size_t rebuilt = 0, small = 0, optimal = 0;
  for (int i = 0; i < 10000; ++i) {
    auto s = draw(), t = draw();
    if (apply_edits(s, extract_edits(s, t)) == t && apply_edits(s, extract_edits(s, t, MergeMode::AllSplit)) == t) ++rebuilt;
    if (s.size() <= 6 && t.size() <= 6) {
      ++small;
      if (align_tokens(s, t).cost == oracle::exhaustive_cost(s, t)) ++optimal;
    }
  }
  return verdict(rebuilt == 10000 && optimal == small,
                 std::to_string(rebuilt) + "/10000 reconstructed, " + std::to_string(optimal) + "/" +
                     std::to_string(small) + " short pairs at the exhaustive optimum");
}

Outcome f05_hand_case() {
  std::vector<std::vector<EditSpan>> hyp = {{{0, 1, "x"}, {2, 3, "y"}, {5, 5, "z"}}};
  std::vector<std::vector<std::vector<EditSpan>>> gold = {{{{0, 1, "x"}, {2, 3, "y"}, {4, 5, ""}, {7, 8, "w"}}}};
  auto r = max_match(hyp, gold);
  return verdict(r.f05 == 0.625, fmt("P %.4f R %.4f F0.5 %.17g", r.precision, r.recall, r.f05));
}

std::vector<std::vector<std::string>> sentences_of(const std::vector<std::string>& paragraphs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : paragraphs) {
    for (auto& s : sentence_tokens(p)) out.push_back(std::move(s));
  }
  return out;
}

Outcome lm_sanity() {
  auto paras = ts::text_paragraphs();
  std::vector<std::string> train, held;
  for (std::size_t i = 0; i < paras.size(); ++i) (i % 5 == 0 ? held : train).push_back(paras[i]);
  auto model = NgramModel::fit(sentences_of(train), {.order = 3});

  Rng rng(404);
  const auto v = model.vocabulary_size();
  auto train_sents = sentences_of(train);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<WordId> ctx(2);
    const auto& s = train_sents[rng.below(train_sents.size())];
    if (i % 2 == 0 && s.size() >= 2) {
      auto j = rng.below(s.size() - 1);
      ctx = {model.id(s[j]), model.id(s[j + 1])};
    } else {
      ctx = {static_cast<WordId>(rng.below(v)), static_cast<WordId>(1 + rng.below(v - 1))};
    }
    double sum = 0;
    for (WordId w = 1; w < v; ++w) sum += model.prob(w, ctx);
    worst = std::max(worst, std::fabs(sum - 1.0));
  }

  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto sents = sentence_tokens(held[static_cast<std::size_t>(trial) % held.size()]);
    auto shuffled = sents;
    for (auto& s : shuffled) rng.shuffle(s);
    if (model.perplexity(sents) < model.perplexity(shuffled)) ++wins;
  }
  return verdict(worst <= 1e-6 && wins >= 95,
                 fmt("max |sum p - 1| %.1e over 100 contexts; held-out beats shuffled in %.0f/100", worst, wins));
}

Outcome corruption_reliability() {
  const auto t0 = Clock::now();
  auto docs = ts::documents_from_paragraphs(ts::text_paragraphs(), 5);
  NoiseConfig cfg;
  cfg.seed = 7;
  auto set = build_worse_testset(docs, cfg);
  if (set.pairs.size() < 500) return fail(std::to_string(set.pairs.size()) + " pairs, need at least 500");

  // Two folds by document: the trigram model never sees the documents it judges.
  std::size_t n = 0;
  double credit = 0;
  for (int fold = 0; fold < 2; ++fold) {
    std::vector<std::string> train;
    std::set<std::string> held;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (static_cast<int>(i % 2) == fold) {
        held.insert(docs[i].id);
      } else {
        for (const auto& p : paragraphs(docs[i])) train.push_back(render(docs[i], p, Rendering::Source));
      }
    }
    std::vector<SnippetPair> test;
    for (const auto& p : set.pairs) {
      if (held.count(p.doc_id)) test.push_back(p);
    }
    auto model = std::make_shared<const NgramModel>(NgramModel::fit(sentences_of(train), {.order = 3}));
    EvalOptions o;
    o.seed = 11;
    auto rep = evaluate_metric([&] { return std::make_unique<NativePerplexityMetric>(model, "fold"); }, test, o);
    n += rep.n;
    credit += rep.overall_accuracy * static_cast<double>(rep.n);
  }
  const double acc = credit / static_cast<double>(n);
  const double secs = seconds_since(t0);
  return verdict(acc > 0.60 && secs < 60.0,
                 fmt("native trigram accuracy %.3f on %.0f worse pairs, %.1f s", acc, static_cast<double>(n), secs));
}

Outcome released_corpus() {
  const char* dir = std::getenv("TETRA_DIR");
  if (!dir || !*dir) return skip("TETRA_DIR not set");
  auto docs = parse_corpus(dir);
  auto st = corpus_stats(docs);
  struct Row {
    Aspect a;
    double pct;
  };
  const Row table[] = {{Aspect::Grammaticality, 19.4}, {Aspect::Fluency, 23.7},    {Aspect::Clarity, 19.4},
                       {Aspect::Style, 8.0},           {Aspect::Readability, 16.8}, {Aspect::Redundancy, 7.2},
                       {Aspect::Consistency, 5.5}};
  std::ostringstream detail;
  bool ok = true;
  for (const auto& r : table) {
    const double got = st.percent[static_cast<std::size_t>(r.a)];
    ok = ok && std::fabs(got - r.pct) <= 1.0;
    detail << aspect_name(r.a) << ' ' << fmt("%.1f", got) << ' ';
  }
  const double beyond = 100.0 * st.beyond_gec_ratio;
  ok = ok && std::fabs(beyond - 56.9) <= 2.0;
  auto ag = compute_agreement(docs);
  const double det = ag.detection ? ag.detection->avg : -1, cor = ag.correction ? ag.correction->avg : -1;
  ok = ok && std::fabs(det - 0.32) <= 0.03 && std::fabs(cor - 0.83) <= 0.05;
  detail << fmt("beyond-GEC %.1f%%, detection %.3f, correction %.3f", beyond, det, cor);
  // No split ships with the corpus, so the count is only reported.
  detail << "; all pairs " << extract_pairs(docs).pairs.size() << " (split not recoverable)";
  return verdict(ok, detail.str());
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"fixture corpus round trip", fixture_round_trip},
      {"pair extraction counting", pair_counting},
      {"IRC harness calibration", irc_calibration},
      {"GLEU oracle equivalence", gleu_equivalence},
      {"alignment soundness", alignment_soundness},
      {"F0.5 hand case", f05_hand_case},
      {"LM sanity", lm_sanity},
      {"corruption reliability", corruption_reliability},
      {"released corpus statistics and agreement (soft)", released_corpus},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::Pass ? "PASS" : (o.kind == Outcome::Skip ? "SKIP" : "FAIL");
    std::cout << "[" << tag << "] " << name << ": " << o.detail << "\n";
    failed += o.kind == Outcome::Fail;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all criteria met")) << "\n";
  return failed ? 1 : 0;
}
