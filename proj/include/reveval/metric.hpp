#pragma once

// Metric contract for revision classification. Scores are oriented so that
// higher means better quality; perplexity is negated once, here.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reveval/ngram_lm.hpp"
#include "reveval/pairs.hpp"

namespace reveval {

enum class Choice { A, B, Tie };

std::string_view to_string(Choice c);
Choice mirror(Choice c);

struct MetricVerdict {
  Choice choice = Choice::Tie;
  std::optional<double> score_a;
  std::optional<double> score_b;
};

// Tie iff |a - b| <= tie_epsilon; otherwise the higher score wins.
MetricVerdict verdict_from_scores(double score_a, double score_b, double tie_epsilon);

struct TextPair {
  std::string_view a;
  std::string_view b;
};

struct PairOutcome {
  MetricVerdict verdict;
  std::optional<std::string> error;  // set when the metric failed; verdict is then Tie
};

class Metric {
 public:
  virtual ~Metric() = default;

  virtual std::string id() const = 0;
  virtual bool is_scorer() const { return false; }
  // Throws MetricError for chooser-only metrics or unusable input.
  virtual double score(std::string_view text);
  virtual MetricVerdict choose(std::string_view a, std::string_view b) = 0;
  // Default loops over choose() and records failures per item.
  virtual std::vector<PairOutcome> choose_batch(std::span<const TextPair> items);
  // Whether one instance may serve several threads at once.
  virtual bool thread_safe() const { return false; }
};

class ScoringMetric : public Metric {
 public:
  explicit ScoringMetric(double tie_epsilon = 0.0) : tie_epsilon_(tie_epsilon) {}
  bool is_scorer() const override { return true; }
  MetricVerdict choose(std::string_view a, std::string_view b) override;

 protected:
  double tie_epsilon_;
};

// -perplexity of the text under an n-gram model; sentences are scored
// independently and pooled, so sentence order does not matter.
class NativePerplexityMetric : public ScoringMetric {
 public:
  NativePerplexityMetric(std::shared_ptr<const NgramModel> model, std::string model_name, double tie_epsilon = 0.0);
  std::string id() const override { return "native-ppl:" + model_name_; }
  double score(std::string_view text) override;
  bool thread_safe() const override { return true; }

 private:
  std::shared_ptr<const NgramModel> model_;
  std::string model_name_;
};

// Knows the better side of every pair it was built from; Tie for unknown texts.
class OracleMetric : public Metric {
 public:
  OracleMetric(std::span<const SnippetPair> pairs, bool inverted = false);
  std::string id() const override { return inverted_ ? "oracle-inverted" : "oracle"; }
  MetricVerdict choose(std::string_view a, std::string_view b) override;
  bool thread_safe() const override { return true; }

 private:
  std::vector<std::uint64_t> better_first_;  // sorted keys of (better, worse)
  bool inverted_;
};

// Coin flip keyed by (seed, a, b).
class RandomMetric : public Metric {
 public:
  explicit RandomMetric(std::uint64_t seed) : seed_(seed) {}
  std::string id() const override { return "random:" + std::to_string(seed_); }
  MetricVerdict choose(std::string_view a, std::string_view b) override;
  bool thread_safe() const override { return true; }

 private:
  std::uint64_t seed_;
};

// Mirrors every verdict of the wrapped metric.
class InvertedMetric : public Metric {
 public:
  explicit InvertedMetric(std::unique_ptr<Metric> inner) : inner_(std::move(inner)) {}
  std::string id() const override { return "inverted(" + inner_->id() + ")"; }
  MetricVerdict choose(std::string_view a, std::string_view b) override;
  std::vector<PairOutcome> choose_batch(std::span<const TextPair> items) override;
  bool thread_safe() const override { return inner_->thread_safe(); }

 private:
  std::unique_ptr<Metric> inner_;
};

enum class MetricKind { NativePerplexity, Adapter, Oracle, InvertedOracle, Random };

// Mini-language: native-ppl:<model>, adapter:<command line>, oracle,
// oracle-inverted, random:<seed>. A bare "adapter" takes its command from
// the default (REVEVAL_ADAPTER in the CLI).
struct MetricSpec {
  MetricKind kind = MetricKind::Oracle;
  std::string parameter;
  double tie_epsilon = 0.0;
  std::uint64_t seed = 0;

  std::string text() const;
};

MetricSpec parse_metric_spec(std::string_view spec, std::optional<std::string> default_adapter = std::nullopt);

// Builds metric instances, one per worker. Native models are loaded once and
// shared; adapters get one process per instance. Oracle metrics are built
// from `pairs`.
class MetricFactory {
 public:
  MetricFactory(MetricSpec spec, std::span<const SnippetPair> pairs = {});
  std::unique_ptr<Metric> create() const;
  const MetricSpec& spec() const { return spec_; }

 private:
  MetricSpec spec_;
  std::span<const SnippetPair> pairs_;
  std::shared_ptr<const NgramModel> model_;
};

// Sentence split + tokenization used by text-level scorers.
std::vector<std::vector<std::string>> sentence_tokens(std::string_view text);

}  // namespace reveval
