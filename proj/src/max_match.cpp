#include "reveval/max_match.hpp"

#include <algorithm>
#include <set>

#include "reveval/error.hpp"

namespace reveval {

PrfScore f05_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScore s;
  s.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall == 0.0) {
    s.f05 = 0.0;
  } else if (tp > 0) {
    // (1 + b^2) TP / ((1 + b^2) TP + b^2 FN + FP) with b = 0.5, scaled by 4.
    s.f05 = 5.0 * static_cast<double>(tp) / (5.0 * static_cast<double>(tp) + static_cast<double>(fn) + 4.0 * static_cast<double>(fp));
  } else {
    s.f05 = 1.25 * s.precision * s.recall / (0.25 * s.precision + s.recall);
  }
  return s;
}

namespace {

std::size_t count_matches(const std::vector<EditSpan>& hyp, const std::vector<EditSpan>& gold) {
  std::multiset<EditSpan> pool(gold.begin(), gold.end());
  std::size_t tp = 0;
  for (const auto& e : hyp) {
    auto it = pool.find(e);
    if (it != pool.end()) {
      ++tp;
      pool.erase(it);
    }
  }
  return tp;
}

}  // namespace

MaxMatchResult max_match(std::span<const std::vector<EditSpan>> hypothesis_edits,
                         std::span<const std::vector<std::vector<EditSpan>>> reference_edit_sets) {
  if (hypothesis_edits.size() != reference_edit_sets.size()) {
    throw UsageError("max-match length mismatch: " + std::to_string(hypothesis_edits.size()) + " hypotheses, " +
                     std::to_string(reference_edit_sets.size()) + " reference sets");
  }
  MaxMatchResult r;
  for (std::size_t i = 0; i < hypothesis_edits.size(); ++i) {
    const auto& hyp = hypothesis_edits[i];
    const auto& refs = reference_edit_sets[i];
    if (refs.empty()) throw UsageError("max-match instance " + std::to_string(i) + " has no annotators");
    std::size_t best_k = 0, best_tp = 0;
    double best_f = -1.0;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      std::size_t tp = count_matches(hyp, refs[k]);
      double f = f05_from_counts(tp, hyp.size() - tp, refs[k].size() - tp).f05;
      if (f > best_f) {
        best_f = f;
        best_k = k;
        best_tp = tp;
      }
    }
    r.chosen_annotator.push_back(best_k);
    r.per_instance_f05.push_back(best_f);
    r.tp += best_tp;
    r.fp += hyp.size() - best_tp;
    r.fn += refs[best_k].size() - best_tp;
  }
  auto s = f05_from_counts(r.tp, r.fp, r.fn);
  r.precision = s.precision;
  r.recall = s.recall;
  r.f05 = s.f05;
  return r;
}

MaxMatchResult max_match_f05(const std::vector<std::vector<std::string>>& sources,
                             const std::vector<std::vector<std::string>>& hypotheses,
                             const std::vector<std::vector<std::vector<std::string>>>& references) {
  if (sources.size() != hypotheses.size() || sources.size() != references.size()) {
    throw UsageError("max-match length mismatch: " + std::to_string(sources.size()) + " sources, " +
                     std::to_string(hypotheses.size()) + " hypotheses, " + std::to_string(references.size()) +
                     " reference sets");
  }
  std::vector<std::vector<EditSpan>> hyp_edits(sources.size());
  std::vector<std::vector<std::vector<EditSpan>>> gold(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    hyp_edits[i] = extract_edits(sources[i], hypotheses[i]);
    for (const auto& ref : references[i]) gold[i].push_back(extract_edits(sources[i], ref));
  }
  return max_match(hyp_edits, gold);
}

}  // namespace reveval
