#include "reveval/alignment.hpp"

#include <algorithm>
#include <limits>

#include "reveval/error.hpp"
#include "reveval/text.hpp"
#include "reveval/tokenize.hpp"

namespace reveval {

namespace {

double substitution_cost(const std::string& a, const std::string& b) {
  if (a == b) return 0.0;
  return text::iequals(a, b) ? 0.5 : 1.0;
}

bool transposable(std::span<const std::string> src, std::span<const std::string> tgt, std::size_t i, std::size_t j) {
  return i >= 2 && j >= 2 && src[i - 2] == tgt[j - 1] && src[i - 1] == tgt[j - 2];
}

}  // namespace

double step_cost(const AlignStep& s, std::span<const std::string> src, std::span<const std::string> tgt) {
  switch (s.op) {
    case AlignOp::Match: return 0.0;
    case AlignOp::Substitute: return substitution_cost(src[s.src_begin], tgt[s.tgt_begin]);
    case AlignOp::Insert:
    case AlignOp::Delete:
    case AlignOp::Transpose: return 1.0;
  }
  return 0.0;
}

Alignment align_tokens(std::span<const std::string> src, std::span<const std::string> tgt) {
  const std::size_t n = src.size(), m = tgt.size();
  const std::size_t w = m + 1;
  // Cells order by cost, then by more exact matches, so that among optimal
  // alignments the one keeping the most tokens in place wins.
  struct Cell {
    double cost = 0.0;
    long matches = 0;
    bool operator==(const Cell&) const = default;
    bool better_than(const Cell& o) const { return cost < o.cost || (cost == o.cost && matches > o.matches); }
  };
  std::vector<Cell> table((n + 1) * w);
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return table[i * w + j]; };
  for (std::size_t i = 1; i <= n; ++i) at(i, 0) = {static_cast<double>(i), 0};
  for (std::size_t j = 1; j <= m; ++j) at(0, j) = {static_cast<double>(j), 0};
  auto diag = [&](std::size_t i, std::size_t j) {
    const Cell& c = at(i - 1, j - 1);
    return Cell{c.cost + substitution_cost(src[i - 1], tgt[j - 1]), c.matches + (src[i - 1] == tgt[j - 1] ? 1 : 0)};
  };
  auto plus_one = [](const Cell& c) { return Cell{c.cost + 1.0, c.matches}; };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Cell best = diag(i, j);
      for (const Cell& c : {plus_one(at(i - 1, j)), plus_one(at(i, j - 1))}) {
        if (c.better_than(best)) best = c;
      }
      if (transposable(src, tgt, i, j) && plus_one(at(i - 2, j - 2)).better_than(best)) best = plus_one(at(i - 2, j - 2));
      at(i, j) = best;
    }
  }

  // Backtrace; ties prefer match/substitution, then transposition, deletion, insertion.
  Alignment out;
  out.cost = at(n, m).cost;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cell here = at(i, j);
    if (i > 0 && j > 0 && diag(i, j) == here) {
      AlignOp op = src[i - 1] == tgt[j - 1] ? AlignOp::Match : AlignOp::Substitute;
      out.steps.push_back({op, i - 1, i, j - 1, j});
      --i;
      --j;
    } else if (transposable(src, tgt, i, j) && plus_one(at(i - 2, j - 2)) == here) {
      out.steps.push_back({AlignOp::Transpose, i - 2, i, j - 2, j});
      i -= 2;
      j -= 2;
    } else if (i > 0 && plus_one(at(i - 1, j)) == here) {
      out.steps.push_back({AlignOp::Delete, i - 1, i, j, j});
      --i;
    } else {
      out.steps.push_back({AlignOp::Insert, i, i, j - 1, j});
      --j;
    }
  }
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

std::vector<EditSpan> extract_edits(std::span<const std::string> src, std::span<const std::string> tgt, MergeMode mode) {
  auto alignment = align_tokens(src, tgt);
  std::vector<EditSpan> out;
  auto replacement = [&](std::size_t b, std::size_t e) { return join_tokens(tgt.subspan(b, e - b)); };

  if (mode == MergeMode::AllSplit) {
    for (const auto& s : alignment.steps) {
      if (s.op == AlignOp::Match) continue;
      out.push_back({s.src_begin, s.src_end, replacement(s.tgt_begin, s.tgt_end)});
    }
    return out;
  }

  std::size_t k = 0;
  const auto& steps = alignment.steps;
  while (k < steps.size()) {
    if (steps[k].op == AlignOp::Match) {
      ++k;
      continue;
    }
    std::size_t first = k;
    while (k < steps.size() && steps[k].op != AlignOp::Match) ++k;
    const auto& a = steps[first];
    const auto& b = steps[k - 1];
    out.push_back({a.src_begin, b.src_end, replacement(a.tgt_begin, b.tgt_end)});
  }
  return out;
}

std::vector<std::string> apply_edits(std::span<const std::string> src, std::vector<EditSpan> edits) {
  std::stable_sort(edits.begin(), edits.end(), [](const EditSpan& a, const EditSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (const auto& e : edits) {
    if (e.start < pos || e.end < e.start || e.end > src.size()) throw UsageError("overlapping or out-of-range edit span");
    out.insert(out.end(), src.begin() + static_cast<long>(pos), src.begin() + static_cast<long>(e.start));
    if (!e.replacement.empty()) {
      for (auto& t : text::split(e.replacement, ' ')) out.push_back(std::move(t));
    }
    pos = e.end;
  }
  out.insert(out.end(), src.begin() + static_cast<long>(pos), src.end());
  return out;
}

}  // namespace reveval
