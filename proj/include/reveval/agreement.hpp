#pragma once

// Two-level inter-annotator agreement over documents annotated by several
// editors. Values are directional: for the ordered pair (X, Y),
//
//   detection  = share of X's edits (on papers both annotated) whose span
//                overlaps at least one of Y's spans on the same paper
//   correction = share of overlapping (X edit, Y edit) pairs whose label sets
//                intersect
//
// Spans are source-coordinate byte intervals. Two proper intervals overlap
// when they share a byte; an insertion point i overlaps [c, d) when
// c <= i <= d; two insertion points overlap only when equal.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reveval/corpus.hpp"

namespace reveval {

bool spans_overlap(const Span& a, const Span& b);

struct AgreementSummary {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t pairs = 0;  // ordered pairs with a value
};

struct PairAgreement {
  std::string from;
  std::string to;
  std::size_t shared_papers = 0;
  std::size_t from_edits = 0;
  std::size_t detected = 0;
  std::optional<double> detection;
  std::size_t overlapping_pairs = 0;
  std::size_t label_matches = 0;
  std::optional<double> correction;  // absent without overlapping edits
};

struct AgreementOptions {
  bool raw_labels = false;  // compare raw type labels instead of aspects
  int jobs = 0;
};

struct AgreementReport {
  std::vector<std::string> editors;
  std::vector<PairAgreement> pairs;  // ordered (from, to), from != to
  std::optional<AgreementSummary> detection;
  std::optional<AgreementSummary> correction;
};

// Throws UsageError with fewer than two editors or when no two editors share a paper.
AgreementReport compute_agreement(std::span<const Document> docs, const AgreementOptions& options = {});

// Single directional values for two annotations of the same papers
// (x[i] and y[i] annotate the same paper).
PairAgreement pair_agreement(std::span<const Document* const> x, std::span<const Document* const> y,
                             const AgreementOptions& options = {});

nlohmann::json to_json(const AgreementReport& report);

}  // namespace reveval
