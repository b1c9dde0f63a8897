#pragma once

// Span-level max-match scoring. Per instance, the annotator whose gold edits
// give the highest instance F0.5 is selected (first annotator on ties); an
// edit matches when start, end and replacement are all equal. Counts are
// accumulated over the corpus.
//
// This is a simplified matcher: no edit lattice search and no error-type
// classification.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "reveval/alignment.hpp"

namespace reveval {

struct PrfScore {
  double precision = 1.0;
  double recall = 1.0;
  double f05 = 1.0;
};

// Conventions: P = 1 without system edits, R = 1 without gold edits,
// F0.5 = 0 when P + R == 0. Computed from counts so exact fractions stay exact.
PrfScore f05_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct MaxMatchResult {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f05 = 1.0;
  std::vector<std::size_t> chosen_annotator;
  std::vector<double> per_instance_f05;
};

// hypothesis_edits[i]: system edits of instance i.
// reference_edit_sets[i][k]: edits of annotator k for instance i (k >= 1 entries).
MaxMatchResult max_match(std::span<const std::vector<EditSpan>> hypothesis_edits,
                         std::span<const std::vector<std::vector<EditSpan>>> reference_edit_sets);

// Token-level form: system and gold edits are extracted by alignment against
// the source tokens. Throws UsageError on length mismatch.
MaxMatchResult max_match_f05(const std::vector<std::vector<std::string>>& sources,
                             const std::vector<std::vector<std::string>>& hypotheses,
                             const std::vector<std::vector<std::vector<std::string>>>& references);

}  // namespace reveval
