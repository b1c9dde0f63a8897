#include <gtest/gtest.h>

#include "reveval/agreement.hpp"
#include "reveval/error.hpp"
#include "reveval/random.hpp"
#include "test_support.hpp"

using namespace reveval;
namespace ts = testing_support;

namespace {

Edit edit_at(std::size_t b, std::size_t e, Aspect a, const std::string& raw = "x") {
  Edit ed;
  ed.src = std::string(e - b, 's');
  ed.tgt = "t";
  ed.type = raw;
  ed.labels = {{a, raw}};
  ed.span = {b, e};
  return ed;
}

Document annotated(const std::string& id, const std::string& editor, std::vector<Edit> es) {
  Document d;
  d.id = id;
  d.editor = editor;
  Section s;
  for (auto& e : es) s.nodes.emplace_back(std::move(e));
  d.sections.push_back(std::move(s));
  return d;
}

PairAgreement directional(const Document& x, const Document& y, AgreementOptions o = {}) {
  const Document* xp[] = {&x};
  const Document* yp[] = {&y};
  return pair_agreement(xp, yp, o);
}

const PairAgreement& find(const AgreementReport& r, const std::string& from, const std::string& to) {
  for (const auto& p : r.pairs) {
    if (p.from == from && p.to == to) return p;
  }
  throw std::runtime_error("no pair " + from + "->" + to);
}

}  // namespace

TEST(Overlap, Conventions) {
  EXPECT_TRUE(spans_overlap({0, 5}, {4, 6}));
  EXPECT_FALSE(spans_overlap({0, 5}, {5, 6}));
  EXPECT_TRUE(spans_overlap({5, 5}, {0, 5}));  // insertion at the right edge
  EXPECT_TRUE(spans_overlap({0, 5}, {0, 0}));
  EXPECT_FALSE(spans_overlap({6, 6}, {0, 5}));
  EXPECT_TRUE(spans_overlap({3, 3}, {3, 3}));
  EXPECT_FALSE(spans_overlap({3, 3}, {4, 4}));
}

TEST(Agreement, HandExample) {
  auto x = annotated("P", "X", {edit_at(0, 5, Aspect::Clarity), edit_at(10, 12, Aspect::Style)});
  auto y = annotated("P", "Y", {edit_at(3, 4, Aspect::Clarity), edit_at(20, 25, Aspect::Style)});
  auto xy = directional(x, y);
  EXPECT_EQ(*xy.detection, 0.5);
  EXPECT_EQ(*xy.correction, 1.0);
  auto yx = directional(y, x);
  EXPECT_EQ(*yx.detection, 0.5);

  auto self = directional(x, x);
  EXPECT_EQ(*self.detection, 1.0);
  EXPECT_EQ(*self.correction, 1.0);

  auto z = annotated("P", "Z", {edit_at(2, 8, Aspect::Grammaticality)});
  auto xz = directional(x, z);
  EXPECT_EQ(*xz.detection, 0.5);
  EXPECT_EQ(*xz.correction, 0.0);
  auto empty = annotated("P", "E", {});
  EXPECT_EQ(*directional(x, empty).detection, 0.0);
  EXPECT_FALSE(directional(x, empty).correction);
  EXPECT_FALSE(directional(empty, x).detection);
}

TEST(Agreement, FixtureValues) {
  auto docs = parse_corpus(ts::fixture_dir() / "corpus");
  auto r = compute_agreement(docs);
  EXPECT_EQ(r.editors, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(r.pairs.size(), 2u);
  const auto& ab = find(r, "A", "B");
  EXPECT_EQ(ab.shared_papers, 1u);
  EXPECT_EQ(ab.from_edits, 3u);
  EXPECT_DOUBLE_EQ(*ab.detection, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*ab.correction, 1.0);
  const auto& ba = find(r, "B", "A");
  EXPECT_DOUBLE_EQ(*ba.detection, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.detection->avg, 1.0 / 3.0);
  EXPECT_EQ(r.detection->pairs, 2u);

  auto raw = compute_agreement(docs, {.raw_labels = true});
  EXPECT_DOUBLE_EQ(*find(raw, "A", "B").correction, 0.0);

  auto j = to_json(r);
  EXPECT_EQ(j["pairs"].size(), 2u);
  EXPECT_EQ(j["editors"][1], "B");
}

TEST(Agreement, RemovingTargetEditsNeverRaisesDetection) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    auto random_edits = [&] {
      std::vector<Edit> es;
      const auto n = 1 + rng.below(6);
      for (std::uint64_t i = 0; i < n; ++i) {
        auto b = rng.below(40);
        es.push_back(edit_at(b, b + rng.below(5), kAllAspects[rng.below(kAspectCount)]));
      }
      return es;
    };
    auto xe = random_edits(), ye = random_edits();
    auto x = annotated("P", "X", xe);
    auto y = annotated("P", "Y", ye);
    const double before = *directional(x, y).detection;
    auto fewer = ye;
    fewer.erase(fewer.begin() + static_cast<long>(rng.below(fewer.size())));
    const double after = *directional(x, annotated("P", "Y", fewer)).detection;
    ASSERT_LE(after, before);
  }
}

TEST(Agreement, SummaryAndErrors) {
  std::vector<Document> docs = {
      annotated("P1", "A", {edit_at(0, 2, Aspect::Style)}), annotated("P1", "B", {edit_at(1, 3, Aspect::Style)}),
      annotated("P2", "A", {edit_at(0, 2, Aspect::Style)}), annotated("P2", "C", {edit_at(5, 6, Aspect::Style)}),
      annotated("P3", "B", {edit_at(0, 1, Aspect::Style)}),
  };
  auto r = compute_agreement(docs, {.jobs = 2});
  EXPECT_EQ(r.editors.size(), 3u);
  EXPECT_EQ(r.pairs.size(), 6u);
  EXPECT_EQ(find(r, "B", "C").shared_papers, 0u);
  EXPECT_EQ(r.detection->pairs, 4u);  // A<->B and A<->C
  EXPECT_EQ(r.detection->min, 0.0);
  EXPECT_EQ(r.detection->max, 1.0);
  EXPECT_DOUBLE_EQ(r.detection->avg, 0.5);

  std::vector<Document> solo = {annotated("P", "A", {})};
  EXPECT_THROW(compute_agreement(solo), UsageError);
  std::vector<Document> disjoint = {annotated("P", "A", {}), annotated("Q", "B", {})};
  EXPECT_THROW(compute_agreement(disjoint), UsageError);
  std::vector<Document> twice = {annotated("P", "A", {}), annotated("P", "A", {})};
  EXPECT_THROW(compute_agreement(twice), UsageError);
}
