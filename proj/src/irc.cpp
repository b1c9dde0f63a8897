#include "reveval/irc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>

#include "reveval/error.hpp"
#include "reveval/random.hpp"
#include "parallel.hpp"

namespace reveval {

using nlohmann::json;

namespace {

std::uint64_t pair_identity(const SnippetPair& p) {
  std::uint64_t h = fnv1a64(p.doc_id);
  h = hash_combine(h, fnv1a64(p.editor));
  h = hash_combine(h, p.paragraph_index);
  h = hash_combine(h, p.edit_index);
  h = hash_combine(h, fnv1a64(p.aspect.raw_label));
  h = hash_combine(h, fnv1a64(p.source));
  h = hash_combine(h, fnv1a64(p.revised));
  return hash_combine(h, static_cast<std::uint64_t>(p.kind));
}

PairResult score_outcome(const SnippetPair& pair, std::uint64_t seed, const PairOutcome& outcome) {
  PairResult r;
  r.better = better_on_b(pair, seed) ? Choice::B : Choice::A;
  r.error = outcome.error;
  r.verdict = outcome.error ? Choice::Tie : outcome.verdict.choice;
  if (r.verdict == Choice::Tie) r.credit = 0.5;
  else r.credit = r.verdict == r.better ? 1.0 : 0.0;
  return r;
}

IrcReport aggregate(std::string metric_id, std::span<const SnippetPair> pairs, std::vector<PairResult> results,
                    const EvalOptions& options) {
  IrcReport rep;
  rep.metric_id = std::move(metric_id);
  rep.seed = options.seed;
  rep.n = pairs.size();

  std::vector<double> all;
  std::array<std::vector<double>, kAspectCount> by_aspect;
  std::size_t ties = 0;
  all.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    all.push_back(results[i].credit);
    by_aspect[static_cast<std::size_t>(pairs[i].aspect.aspect)].push_back(results[i].credit);
    if (results[i].verdict == Choice::Tie) ++ties;
    if (results[i].error) ++rep.error_count;
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  rep.overall_accuracy = mean(all);
  std::tie(rep.ci_low, rep.ci_high) = bootstrap_ci(all, options.bootstrap_resamples, options.ci_level, options.seed);
  for (std::size_t a = 0; a < kAspectCount; ++a) {
    auto& slot = rep.per_aspect[a];
    slot.n = by_aspect[a].size();
    if (slot.n == 0) continue;
    slot.accuracy = mean(by_aspect[a]);
    std::tie(slot.ci_low, slot.ci_high) =
        bootstrap_ci(by_aspect[a], options.bootstrap_resamples, options.ci_level, hash_combine(options.seed, a + 1));
  }
  rep.tie_rate = static_cast<double>(ties) / static_cast<double>(rep.n);
  rep.results = std::move(results);
  return rep;
}

}  // namespace

bool better_on_b(const SnippetPair& pair, std::uint64_t seed) {
  return splitmix64(hash_combine(seed, pair_identity(pair))) & 1;
}

std::pair<std::string_view, std::string_view> present(const SnippetPair& pair, std::uint64_t seed) {
  std::string_view better = pair.revised_is_better() ? pair.revised : pair.source;
  std::string_view worse = pair.revised_is_better() ? pair.source : pair.revised;
  if (better_on_b(pair, seed)) return {worse, better};
  return {better, worse};
}

IrcReport evaluate_metric(const MetricMaker& make, std::span<const SnippetPair> pairs, const EvalOptions& options) {
  if (pairs.empty()) throw UsageError("no pairs to evaluate");
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t chunks = (pairs.size() + batch - 1) / batch;

  std::unique_ptr<Metric> first = make();
  const std::string metric_id = first->id();
  const bool shared = first->thread_safe();
  const int workers = std::max(1, std::min<int>(detail::resolve_jobs(options.jobs), static_cast<int>(chunks)));

  std::vector<PairResult> results(pairs.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;

#pragma omp parallel num_threads(workers)
  {
    std::unique_ptr<Metric> own;
    Metric* metric = nullptr;
    bool is_first = false;
#ifdef _OPENMP
    is_first = omp_get_thread_num() == 0;
#else
    is_first = true;
#endif
    try {
      if (shared || is_first) metric = first.get();
      else {
        own = make();
        metric = own.get();
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }

#pragma omp for schedule(dynamic)
    for (long c = 0; c < static_cast<long>(chunks); ++c) {
      if (!metric) continue;
      const std::size_t begin = static_cast<std::size_t>(c) * batch;
      const std::size_t end = std::min(pairs.size(), begin + batch);
      std::vector<TextPair> items;
      items.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        auto [a, b] = present(pairs[i], options.seed);
        items.push_back({a, b});
      }
      try {
        auto outcomes = metric->choose_batch(items);
        for (std::size_t i = begin; i < end; ++i) results[i] = score_outcome(pairs[i], options.seed, outcomes[i - begin]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(metric_id, pairs, std::move(results), options);
}

IrcReport evaluate_metric(const MetricFactory& factory, std::span<const SnippetPair> pairs, const EvalOptions& options) {
  return evaluate_metric([&factory] { return factory.create(); }, pairs, options);
}

IrcReport evaluate_metric_serial(Metric& metric, std::span<const SnippetPair> pairs, const EvalOptions& options) {
  if (pairs.empty()) throw UsageError("no pairs to evaluate");
  std::vector<PairResult> results;
  results.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto [a, b] = present(p, options.seed);
    PairOutcome outcome;
    try {
      outcome.verdict = metric.choose(a, b);
    } catch (const MetricError& e) {
      outcome.error = e.what();
    }
    results.push_back(score_outcome(p, options.seed, outcome));
  }
  return aggregate(metric.id(), pairs, std::move(results), options);
}

std::pair<double, double> bootstrap_ci(std::span<const double> credits, int resamples, double level,
                                       std::uint64_t seed) {
  if (credits.empty()) throw UsageError("bootstrap needs at least one value");
  if (resamples < 1) throw UsageError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must be in (0, 1)");
  const std::size_t n = credits.size();
  double point = 0.0;
  for (double c : credits) point += c;
  point /= static_cast<double>(n);

  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += credits[rng.below(n)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  const double b = static_cast<double>(resamples);
  auto lo_idx = static_cast<std::size_t>(std::floor(alpha / 2.0 * b));
  auto hi_idx = static_cast<std::size_t>(std::max(1.0, std::ceil((1.0 - alpha / 2.0) * b)) - 1.0);
  lo_idx = std::min(lo_idx, means.size() - 1);
  hi_idx = std::min(hi_idx, means.size() - 1);
  // Percentile intervals can miss the point estimate on tiny skewed samples.
  return {std::min(means[lo_idx], point), std::max(means[hi_idx], point)};
}

std::vector<AspectRow> per_aspect_report(const IrcReport& report) {
  std::vector<AspectRow> rows;
  for (Aspect a : kAllAspects) {
    const auto& s = report.aspect(a);
    rows.push_back({std::string(aspect_name(a)), s.n, s.accuracy, s.ci_low, s.ci_high});
  }
  rows.push_back({"Total", report.n, report.overall_accuracy, report.ci_low, report.ci_high});
  return rows;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string render_csv(std::span<const AspectRow> rows) {
  std::string out = "aspect,n,accuracy,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out += r.aspect + "," + std::to_string(r.n) + ",";
    if (r.accuracy) out += fixed(*r.accuracy) + "," + fixed(r.ci_low) + "," + fixed(r.ci_high);
    else out += ",,";
    out += "\n";
  }
  return out;
}

std::string render_text(std::span<const AspectRow> rows) {
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.aspect.size());
  auto pad = [](std::string s, std::size_t width, bool right) {
    if (s.size() >= width) return s;
    return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
  };
  std::string out = pad("aspect", w, false) + "  " + pad("n", 6, true) + "  " + pad("acc", 6, true) + "  " +
                    pad("95% CI", 15, true) + "\n";
  for (const auto& r : rows) {
    out += pad(r.aspect, w, false) + "  " + pad(std::to_string(r.n), 6, true) + "  ";
    if (r.accuracy) {
      out += pad(fixed(*r.accuracy, 3), 6, true) + "  " +
             pad("[" + fixed(r.ci_low, 3) + ", " + fixed(r.ci_high, 3) + "]", 15, true);
    } else {
      out += pad("-", 6, true) + "  " + pad("-", 15, true);
    }
    out += "\n";
  }
  return out;
}

json to_json(const IrcReport& report) {
  json aspects = json::array();
  for (const auto& row : per_aspect_report(report)) {
    if (row.aspect == "Total") continue;
    json r{{"aspect", row.aspect}, {"n", row.n}};
    if (row.accuracy) {
      r["accuracy"] = *row.accuracy;
      r["ci_low"] = row.ci_low;
      r["ci_high"] = row.ci_high;
    } else {
      r["accuracy"] = nullptr;
      r["ci_low"] = nullptr;
      r["ci_high"] = nullptr;
    }
    aspects.push_back(std::move(r));
  }
  json errors = json::array();
  for (std::size_t i = 0; i < report.results.size() && errors.size() < 20; ++i) {
    if (report.results[i].error) errors.push_back({{"pair", i}, {"message", *report.results[i].error}});
  }
  return json{
      {"schema", kIrcReportSchema},
      {"metric", report.metric_id},
      {"seed", report.seed},
      {"n", report.n},
      {"overall_accuracy", report.overall_accuracy},
      {"ci_low", report.ci_low},
      {"ci_high", report.ci_high},
      {"tie_rate", report.tie_rate},
      {"error_count", report.error_count},
      {"per_aspect", std::move(aspects)},
      {"first_errors", std::move(errors)},
  };
}

}  // namespace reveval
