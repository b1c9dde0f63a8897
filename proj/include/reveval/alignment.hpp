#pragma once

// Token alignment by weighted Damerau-Levenshtein dynamic programming and
// edit-span extraction on top of it.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace reveval {

enum class AlignOp { Match, Substitute, Insert, Delete, Transpose };

struct AlignStep {
  AlignOp op = AlignOp::Match;
  std::size_t src_begin = 0, src_end = 0;
  std::size_t tgt_begin = 0, tgt_end = 0;
};

struct Alignment {
  std::vector<AlignStep> steps;  // left to right, covering both sequences
  double cost = 0.0;
};

// Among optimal alignments the one with the most exact matches is kept.
// Costs: match 0; substitution 1, or 0.5 when the tokens differ only in case;
// insertion and deletion 1; adjacent transposition 1.
double step_cost(const AlignStep& step, std::span<const std::string> src, std::span<const std::string> tgt);

Alignment align_tokens(std::span<const std::string> src, std::span<const std::string> tgt);

struct EditSpan {
  std::size_t start = 0;  // token indices into the source, half-open
  std::size_t end = 0;
  std::string replacement;  // target tokens joined by single spaces

  bool is_insertion() const { return start == end; }
  bool operator==(const EditSpan&) const = default;
  auto operator<=>(const EditSpan&) const = default;
};

enum class MergeMode { Merged, AllSplit };

// Contiguous non-match steps become one span in Merged mode; AllSplit emits
// one span per step.
std::vector<EditSpan> extract_edits(std::span<const std::string> src, std::span<const std::string> tgt,
                                    MergeMode mode = MergeMode::Merged);

// Applies non-overlapping spans (any order) to `src`.
std::vector<std::string> apply_edits(std::span<const std::string> src, std::vector<EditSpan> edits);

}  // namespace reveval
