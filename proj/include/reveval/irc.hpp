#pragma once

// Revision classification meta-evaluation: a metric sees both sides of every
// snippet pair (in a seeded random order) and earns 1 for picking the better
// side, 0.5 for a tie and 0 otherwise. Metric failures count as ties and are
// tallied separately.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reveval/metric.hpp"
#include "reveval/pairs.hpp"

namespace reveval {

inline constexpr std::string_view kIrcReportSchema = "irc_report_v1";

struct AspectAccuracy {
  std::optional<double> accuracy;  // absent when n == 0
  std::size_t n = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct PairResult {
  Choice better = Choice::A;  // side that held the better text
  Choice verdict = Choice::Tie;
  double credit = 0.5;
  std::optional<std::string> error;
};

struct IrcReport {
  std::string metric_id;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double overall_accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::array<AspectAccuracy, kAspectCount> per_aspect{};  // indexed like kAllAspects
  double tie_rate = 0.0;
  std::size_t error_count = 0;
  std::vector<PairResult> results;  // in input order

  const AspectAccuracy& aspect(Aspect a) const { return per_aspect[static_cast<std::size_t>(a)]; }
};

// Which side (A or B) the better text is shown on. Keyed by pair content and
// provenance plus the seed, never by position in the list.
bool better_on_b(const SnippetPair& pair, std::uint64_t seed);
std::pair<std::string_view, std::string_view> present(const SnippetPair& pair, std::uint64_t seed);

using MetricMaker = std::function<std::unique_ptr<Metric>()>;

struct EvalOptions {
  std::uint64_t seed = 0;
  int jobs = 0;                  // <= 0: all cores
  std::size_t batch_size = 64;   // pairs per choose_batch call
  int bootstrap_resamples = 1000;
  double ci_level = 0.95;
};

// Workers each get their own metric from `make` (one adapter process per
// worker) unless the first instance reports thread_safe(). Throws when the
// metric cannot be created; per-pair failures are recorded instead.
IrcReport evaluate_metric(const MetricMaker& make, std::span<const SnippetPair> pairs, const EvalOptions& options);
IrcReport evaluate_metric(const MetricFactory& factory, std::span<const SnippetPair> pairs, const EvalOptions& options);

// Single-threaded reference: one choose() call per pair, in order.
IrcReport evaluate_metric_serial(Metric& metric, std::span<const SnippetPair> pairs, const EvalOptions& options);

// Percentile bootstrap of the mean. With B resamples and alpha = 1 - level the
// bounds are the sorted means at floor(alpha/2 * B) and ceil((1 - alpha/2) * B) - 1.
std::pair<double, double> bootstrap_ci(std::span<const double> credits, int resamples = 1000, double level = 0.95,
                                       std::uint64_t seed = 0);

struct AspectRow {
  std::string aspect;
  std::size_t n = 0;
  std::optional<double> accuracy;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Rows in aspect table order with Other last, then a "Total" row.
std::vector<AspectRow> per_aspect_report(const IrcReport& report);
std::string render_csv(std::span<const AspectRow> rows);
std::string render_text(std::span<const AspectRow> rows);

nlohmann::json to_json(const IrcReport& report);

}  // namespace reveval
