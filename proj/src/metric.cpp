#include "reveval/metric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "reveval/adapter.hpp"
#include "reveval/error.hpp"
#include "reveval/random.hpp"
#include "reveval/text.hpp"
#include "reveval/tokenize.hpp"

namespace reveval {

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::A: return "a";
    case Choice::B: return "b";
    case Choice::Tie: return "tie";
  }
  return "tie";
}

Choice mirror(Choice c) {
  if (c == Choice::A) return Choice::B;
  if (c == Choice::B) return Choice::A;
  return Choice::Tie;
}

MetricVerdict verdict_from_scores(double score_a, double score_b, double tie_epsilon) {
  MetricVerdict v{Choice::Tie, score_a, score_b};
  if (std::isnan(score_a) || std::isnan(score_b)) throw MetricError("metric returned NaN");
  if (std::fabs(score_a - score_b) > tie_epsilon) v.choice = score_a > score_b ? Choice::A : Choice::B;
  return v;
}

double Metric::score(std::string_view) { throw MetricError(id() + " is a chooser, not a scorer"); }

std::vector<PairOutcome> Metric::choose_batch(std::span<const TextPair> items) {
  std::vector<PairOutcome> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    try {
      out.push_back({choose(item.a, item.b), std::nullopt});
    } catch (const MetricError& e) {
      out.push_back({MetricVerdict{}, std::string(e.what())});
    }
  }
  return out;
}

MetricVerdict ScoringMetric::choose(std::string_view a, std::string_view b) {
  if (a == b) return {Choice::Tie, std::nullopt, std::nullopt};
  const double sa = score(a);
  const double sb = score(b);
  return verdict_from_scores(sa, sb, tie_epsilon_);
}

std::vector<std::vector<std::string>> sentence_tokens(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : text::split_sentences(text)) {
    auto toks = tokenize_words(s);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

NativePerplexityMetric::NativePerplexityMetric(std::shared_ptr<const NgramModel> model, std::string model_name,
                                               double tie_epsilon)
    : ScoringMetric(tie_epsilon), model_(std::move(model)), model_name_(std::move(model_name)) {
  if (!model_) throw UsageError("native-ppl metric needs a model");
}

double NativePerplexityMetric::score(std::string_view text) {
  auto sentences = sentence_tokens(text);
  if (sentences.empty()) throw MetricError("cannot score empty text");
  return -model_->perplexity(sentences);
}

namespace {

std::uint64_t pair_key(std::string_view better, std::string_view worse) {
  return hash_combine(fnv1a64(better), fnv1a64(worse));
}

}  // namespace

OracleMetric::OracleMetric(std::span<const SnippetPair> pairs, bool inverted) : inverted_(inverted) {
  better_first_.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.revised_is_better()) better_first_.push_back(pair_key(p.revised, p.source));
    else better_first_.push_back(pair_key(p.source, p.revised));
  }
  std::sort(better_first_.begin(), better_first_.end());
}

MetricVerdict OracleMetric::choose(std::string_view a, std::string_view b) {
  Choice c = Choice::Tie;
  if (std::binary_search(better_first_.begin(), better_first_.end(), pair_key(a, b))) c = Choice::A;
  else if (std::binary_search(better_first_.begin(), better_first_.end(), pair_key(b, a))) c = Choice::B;
  return {inverted_ ? mirror(c) : c, std::nullopt, std::nullopt};
}

MetricVerdict RandomMetric::choose(std::string_view a, std::string_view b) {
  if (a == b) return {};
  // Order-independent key so that swapping sides mirrors the verdict.
  const bool flip = b < a;
  std::string_view lo = flip ? b : a, hi = flip ? a : b;
  const bool lo_wins = splitmix64(hash_combine(seed_, pair_key(lo, hi))) & 1;
  const Choice c = lo_wins ? Choice::A : Choice::B;
  return {flip ? mirror(c) : c, std::nullopt, std::nullopt};
}

namespace {

// Inverted scores stay attached to their text but flip orientation.
void negate(MetricVerdict& v) {
  v.choice = mirror(v.choice);
  if (v.score_a) v.score_a = -*v.score_a;
  if (v.score_b) v.score_b = -*v.score_b;
}

}  // namespace

MetricVerdict InvertedMetric::choose(std::string_view a, std::string_view b) {
  auto v = inner_->choose(a, b);
  negate(v);
  return v;
}

std::vector<PairOutcome> InvertedMetric::choose_batch(std::span<const TextPair> items) {
  auto out = inner_->choose_batch(items);
  for (auto& o : out) negate(o.verdict);
  return out;
}

std::string MetricSpec::text() const {
  switch (kind) {
    case MetricKind::NativePerplexity: return "native-ppl:" + parameter;
    case MetricKind::Adapter: return "adapter:" + parameter;
    case MetricKind::Oracle: return "oracle";
    case MetricKind::InvertedOracle: return "oracle-inverted";
    case MetricKind::Random: return "random:" + std::to_string(seed);
  }
  return {};
}

MetricSpec parse_metric_spec(std::string_view spec, std::optional<std::string> default_adapter) {
  MetricSpec out;
  auto colon = spec.find(':');
  std::string_view head = spec.substr(0, colon);
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "native-ppl") {
    if (rest.empty()) throw UsageError("native-ppl needs a model path: native-ppl:<model>");
    out.kind = MetricKind::NativePerplexity;
    out.parameter = rest;
  } else if (head == "adapter") {
    out.kind = MetricKind::Adapter;
    if (!rest.empty()) out.parameter = rest;
    else if (default_adapter && !default_adapter->empty()) out.parameter = *default_adapter;
    else throw UsageError("adapter needs a command: adapter:<command> or REVEVAL_ADAPTER");
  } else if (head == "oracle" && colon == std::string_view::npos) {
    out.kind = MetricKind::Oracle;
  } else if (head == "oracle-inverted" && colon == std::string_view::npos) {
    out.kind = MetricKind::InvertedOracle;
  } else if (head == "random") {
    out.kind = MetricKind::Random;
    if (!rest.empty()) {
      auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), out.seed);
      if (ec != std::errc{} || p != rest.data() + rest.size()) {
        throw UsageError("random metric seed must be a non-negative integer: " + std::string(spec));
      }
    }
  } else {
    throw UsageError("unknown metric spec '" + std::string(spec) +
                     "' (expected native-ppl:<model>, adapter:<command>, oracle, oracle-inverted or random:<seed>)");
  }
  return out;
}

MetricFactory::MetricFactory(MetricSpec spec, std::span<const SnippetPair> pairs)
    : spec_(std::move(spec)), pairs_(pairs) {
  if (spec_.kind == MetricKind::NativePerplexity) {
    model_ = std::make_shared<const NgramModel>(NgramModel::load_file(spec_.parameter));
  }
}

std::unique_ptr<Metric> MetricFactory::create() const {
  switch (spec_.kind) {
    case MetricKind::NativePerplexity:
      return std::make_unique<NativePerplexityMetric>(model_, spec_.parameter, spec_.tie_epsilon);
    case MetricKind::Adapter: return std::make_unique<AdapterMetric>(spec_.parameter, spec_.tie_epsilon);
    case MetricKind::Oracle: return std::make_unique<OracleMetric>(pairs_, false);
    case MetricKind::InvertedOracle: return std::make_unique<OracleMetric>(pairs_, true);
    case MetricKind::Random: return std::make_unique<RandomMetric>(spec_.seed);
  }
  throw UsageError("unsupported metric kind");
}

}  // namespace reveval
