#include <gtest/gtest.h>

#include "reveval/error.hpp"
#include "reveval/metric.hpp"
#include "reveval/random.hpp"
#include "test_support.hpp"

using namespace reveval;
namespace ts = testing_support;

namespace {

SnippetPair gold(std::string src, std::string rev) {
  SnippetPair p;
  p.source = std::move(src);
  p.revised = std::move(rev);
  return p;
}

std::shared_ptr<const NgramModel> small_model() {
  std::vector<std::vector<std::string>> sents;
  for (const auto& p : ts::text_paragraphs()) {
    for (auto& s : sentence_tokens(p)) sents.push_back(std::move(s));
  }
  return std::make_shared<const NgramModel>(NgramModel::fit(sents, {.order = 3}));
}

}  // namespace

TEST(Verdict, HigherScoreWins) {
  // -12 vs -10.5: b is better.
  auto v = verdict_from_scores(-12.0, -10.5, 0.0);
  EXPECT_EQ(v.choice, Choice::B);
  EXPECT_EQ(*v.score_a, -12.0);
  EXPECT_EQ(verdict_from_scores(3, 1, 0).choice, Choice::A);
  EXPECT_EQ(verdict_from_scores(1, 1, 0).choice, Choice::Tie);
  EXPECT_EQ(verdict_from_scores(1.0, 1.4, 0.5).choice, Choice::Tie);
  EXPECT_EQ(verdict_from_scores(1.0, 1.6, 0.5).choice, Choice::B);
  EXPECT_THROW(verdict_from_scores(std::nan(""), 1, 0), MetricError);
  EXPECT_EQ(mirror(Choice::A), Choice::B);
  EXPECT_EQ(mirror(Choice::Tie), Choice::Tie);
  EXPECT_EQ(to_string(Choice::Tie), "tie");
}

TEST(MetricSpec, Parsing) {
  auto n = parse_metric_spec("native-ppl:/tmp/m.bin");
  EXPECT_EQ(n.kind, MetricKind::NativePerplexity);
  EXPECT_EQ(n.parameter, "/tmp/m.bin");
  auto a = parse_metric_spec("adapter:python3 run.py --x a:b");
  EXPECT_EQ(a.kind, MetricKind::Adapter);
  EXPECT_EQ(a.parameter, "python3 run.py --x a:b");
  EXPECT_EQ(parse_metric_spec("adapter", std::string("./env-adapter")).parameter, "./env-adapter");
  EXPECT_EQ(parse_metric_spec("oracle").kind, MetricKind::Oracle);
  EXPECT_EQ(parse_metric_spec("oracle-inverted").kind, MetricKind::InvertedOracle);
  auto r = parse_metric_spec("random:42");
  EXPECT_EQ(r.kind, MetricKind::Random);
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.text(), "random:42");
  EXPECT_EQ(a.text(), "adapter:python3 run.py --x a:b");

  for (const char* bad : {"", "native-ppl", "native-ppl:", "adapter", "random:x", "random:-1", "oracle:1", "bleu"}) {
    EXPECT_THROW(parse_metric_spec(bad), UsageError) << bad;
  }
}

TEST(Metrics, OracleAndInverted) {
  std::vector<SnippetPair> pairs = {gold("bad text", "good text"), gold("x y", "x z")};
  OracleMetric o(pairs), inv(pairs, true);
  EXPECT_EQ(o.choose("bad text", "good text").choice, Choice::B);
  EXPECT_EQ(o.choose("good text", "bad text").choice, Choice::A);
  EXPECT_EQ(inv.choose("good text", "bad text").choice, Choice::B);
  EXPECT_EQ(o.choose("unknown", "bad text").choice, Choice::Tie);
  EXPECT_THROW(o.score("x"), MetricError);
  EXPECT_FALSE(o.is_scorer());

  pairs[1].kind = PairKind::Worse;  // source is the better side
  OracleMetric w(pairs);
  EXPECT_EQ(w.choose("x y", "x z").choice, Choice::A);
}

TEST(Metrics, RandomIsAntisymmetricAndBalanced) {
  RandomMetric r(7);
  Rng rng(1);
  int a_wins = 0;
  for (int i = 0; i < 2000; ++i) {
    auto s = std::to_string(rng.next()), t = std::to_string(rng.next());
    auto v = r.choose(s, t);
    ASSERT_EQ(r.choose(t, s).choice, mirror(v.choice));
    ASSERT_EQ(r.choose(s, t).choice, v.choice);
    a_wins += v.choice == Choice::A;
  }
  EXPECT_NEAR(a_wins / 2000.0, 0.5, 0.05);
  EXPECT_EQ(r.choose("same", "same").choice, Choice::Tie);
  EXPECT_NE(RandomMetric(7).id(), RandomMetric(8).id());
}

TEST(Metrics, InvertedWrapperNegatesScores) {
  auto model = small_model();
  InvertedMetric inv(std::make_unique<NativePerplexityMetric>(model, "m"));
  NativePerplexityMetric plain(model, "m");
  const std::string good = "The river runs past the town.", bad = "town the past runs river The.";
  auto v = plain.choose(good, bad);
  auto w = inv.choose(good, bad);
  EXPECT_EQ(w.choice, mirror(v.choice));
  EXPECT_EQ(*w.score_a, -*v.score_a);
  std::vector<TextPair> items = {{good, bad}};
  EXPECT_EQ(inv.choose_batch(items)[0].verdict.choice, w.choice);
}

TEST(Metrics, NativePerplexityPrefersFluentText) {
  NativePerplexityMetric m(small_model(), "m");
  EXPECT_TRUE(m.is_scorer());
  EXPECT_LT(m.score("the"), 0.0);
  // Sentence order does not change the pooled score.
  EXPECT_NEAR(m.score("The boat was slow. We ate bread."), m.score("We ate bread. The boat was slow."), 1e-9);
  EXPECT_EQ(m.choose("The water was cold.", "water The cold was.").choice, Choice::A);
  EXPECT_THROW(m.score("   "), MetricError);

  std::vector<TextPair> items = {{"ok text.", "  "}, {"a b.", "a b."}};
  auto out = m.choose_batch(items);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].error.has_value());
  EXPECT_EQ(out[0].verdict.choice, Choice::Tie);
  EXPECT_FALSE(out[1].error.has_value());
  EXPECT_EQ(out[1].verdict.choice, Choice::Tie);
}

TEST(Metrics, FactoryBuildsEachKind) {
  std::vector<SnippetPair> pairs = {gold("a", "b")};
  EXPECT_EQ(MetricFactory(parse_metric_spec("oracle"), pairs).create()->choose("b", "a").choice, Choice::A);
  EXPECT_EQ(MetricFactory(parse_metric_spec("random:3")).create()->id(), "random:3");
  ts::TempDir dir;
  small_model()->save_file(dir / "lm.bin");
  auto f = MetricFactory(parse_metric_spec("native-ppl:" + (dir / "lm.bin").string()));
  EXPECT_TRUE(f.create()->thread_safe());
  EXPECT_THROW(MetricFactory(parse_metric_spec("native-ppl:" + (dir / "missing").string())), UsageError);
}
