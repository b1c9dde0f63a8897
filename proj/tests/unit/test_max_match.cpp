#include <gtest/gtest.h>

#include "reveval/error.hpp"
#include "reveval/max_match.hpp"

using namespace reveval;

TEST(MaxMatch, HandCaseIsExact) {
  // 2 of 3 system edits are gold, 2 of 4 gold edits found: P = 2/3, R = 1/2.
  std::vector<std::vector<EditSpan>> hyp = {{{0, 1, "x"}, {2, 3, "y"}, {5, 5, "z"}}};
  std::vector<std::vector<std::vector<EditSpan>>> gold = {{{{0, 1, "x"}, {2, 3, "y"}, {4, 5, ""}, {7, 8, "w"}}}};
  auto r = max_match(hyp, gold);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 2u);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_EQ(r.f05, 0.625);
}

TEST(MaxMatch, FormulaAgreesWithPrecisionRecallForm) {
  for (std::size_t tp = 1; tp < 6; ++tp) {
    for (std::size_t fp = 0; fp < 6; ++fp) {
      for (std::size_t fn = 0; fn < 6; ++fn) {
        double p = double(tp) / double(tp + fp), r = double(tp) / double(tp + fn);
        EXPECT_NEAR(f05_from_counts(tp, fp, fn).f05, 1.25 * p * r / (0.25 * p + r), 1e-12);
      }
    }
  }
}

TEST(MaxMatch, Conventions) {
  auto none = f05_from_counts(0, 0, 0);
  EXPECT_EQ(none.precision, 1.0);
  EXPECT_EQ(none.recall, 1.0);
  EXPECT_EQ(none.f05, 1.0);
  EXPECT_EQ(f05_from_counts(0, 2, 3).f05, 0.0);
  auto no_sys = f05_from_counts(0, 0, 3);
  EXPECT_EQ(no_sys.precision, 1.0);
  EXPECT_EQ(no_sys.recall, 0.0);
  EXPECT_EQ(no_sys.f05, 0.0);
}

TEST(MaxMatch, IdentityScoresOne) {
  std::vector<std::vector<std::string>> src = {{"a", "b", "c"}, {"x"}};
  std::vector<std::vector<std::string>> hyp = {{"a", "B", "c", "d"}, {"y", "x"}};
  std::vector<std::vector<std::vector<std::string>>> refs = {{hyp[0]}, {hyp[1]}};
  auto r = max_match_f05(src, hyp, refs);
  EXPECT_EQ(r.f05, 1.0);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.fn, 0u);
}

TEST(MaxMatch, PicksTheBestAnnotatorPerInstance) {
  std::vector<std::vector<std::string>> src = {{"a", "b", "c"}};
  std::vector<std::vector<std::string>> hyp = {{"a", "x", "c"}};
  std::vector<std::vector<std::vector<std::string>>> refs = {{{"a", "y", "c"}, {"a", "x", "c"}}};
  auto r = max_match_f05(src, hyp, refs);
  EXPECT_EQ(r.chosen_annotator, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.f05, 1.0);

  // Equal scores keep the first annotator.
  refs = {{{"a", "y", "c"}, {"a", "z", "c"}}};
  EXPECT_EQ(max_match_f05(src, hyp, refs).chosen_annotator, (std::vector<std::size_t>{0}));
}

TEST(MaxMatch, Errors) {
  std::vector<std::vector<std::string>> src = {{"a"}};
  EXPECT_THROW(max_match_f05(src, {}, {}), UsageError);
  std::vector<std::vector<EditSpan>> hyp(1);
  std::vector<std::vector<std::vector<EditSpan>>> gold(1);
  EXPECT_THROW(max_match(hyp, gold), UsageError);
}
