#include "reveval/gleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string_view>
#include <unordered_map>

#include "reveval/error.hpp"
#include "parallel.hpp"
#include "reveval/random.hpp"

namespace reveval {

namespace {

using NgramCounts = std::unordered_map<std::string, long>;

// n-grams keyed by tokens joined with an unused separator byte.
NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<long>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + static_cast<std::size_t>(k)];
    }
    ++counts[key];
  }
  return counts;
}

long lookup(const NgramCounts& c, const std::string& key) {
  auto it = c.find(key);
  return it == c.end() ? 0 : it->second;
}

void check_config(const GleuConfig& cfg) {
  if (cfg.max_n < 1) throw UsageError("GLEU max_n must be >= 1");
  if (cfg.iterations < 1) throw UsageError("GLEU iterations must be >= 1");
}

}  // namespace

GleuStats gleu_statistics(const std::vector<std::string>& source, const std::vector<std::string>& hypothesis,
                          const std::vector<std::string>& reference, int max_n) {
  GleuStats st;
  st.hyp_len = static_cast<long>(hypothesis.size());
  st.ref_len = static_cast<long>(reference.size());
  st.matches.assign(static_cast<std::size_t>(max_n), 0);
  st.penalties.assign(static_cast<std::size_t>(max_n), 0);
  st.totals.assign(static_cast<std::size_t>(max_n), 0);
  for (int n = 1; n <= max_n; ++n) {
    auto h = count_ngrams(hypothesis, n);
    auto r = count_ngrams(reference, n);
    auto s = count_ngrams(source, n);
    long match = 0, penalty = 0, total = 0;
    for (const auto& [g, hc] : h) {
      total += hc;
      long rc = lookup(r, g);
      match += std::min(hc, rc);
      long src_not_ref = std::max(0L, lookup(s, g) - rc);
      penalty += std::min(hc, src_not_ref);
    }
    auto i = static_cast<std::size_t>(n - 1);
    st.matches[i] = match;
    st.penalties[i] = penalty;
    st.totals[i] = total;
  }
  return st;
}

GleuTable gleu_table_serial(std::span<const GleuInstance> instances, int max_n) {
  GleuTable table(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& ref : instances[i].references) {
      table[i].push_back(gleu_statistics(instances[i].source, instances[i].hypothesis, ref, max_n));
    }
  }
  return table;
}

GleuTable gleu_table(std::span<const GleuInstance> instances, int max_n, int jobs) {
  GleuTable table(instances.size());
  const long n = static_cast<long>(instances.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(detail::resolve_jobs(jobs))
  for (long i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    auto& row = table[static_cast<std::size_t>(i)];
    row.reserve(inst.references.size());
    for (const auto& ref : inst.references) row.push_back(gleu_statistics(inst.source, inst.hypothesis, ref, max_n));
  }
  return table;
}

std::vector<std::vector<std::size_t>> sample_references(std::span<const GleuInstance> instances, const GleuConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  std::vector<std::vector<std::size_t>> choices(static_cast<std::size_t>(cfg.iterations));
  for (auto& it : choices) {
    it.reserve(instances.size());
    for (const auto& inst : instances) it.push_back(static_cast<std::size_t>(rng.below(inst.references.size())));
  }
  return choices;
}

double gleu_for_choice(const GleuTable& table, std::span<const std::size_t> choice, const GleuConfig& cfg) {
  const auto max_n = static_cast<std::size_t>(cfg.max_n);
  long hyp_len = 0, ref_len = 0;
  std::vector<long> numer(max_n, 0), denom(max_n, 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& st = table[i][choice[i]];
    hyp_len += st.hyp_len;
    ref_len += st.ref_len;
    for (std::size_t n = 0; n < max_n; ++n) {
      numer[n] += st.matches[n] - st.penalties[n];
      denom[n] += st.totals[n];
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    double p = denom[n] > 0 ? std::max(cfg.epsilon_floor, static_cast<double>(numer[n])) / static_cast<double>(denom[n])
                            : cfg.epsilon_floor;
    log_precision += std::log(p) / static_cast<double>(max_n);
  }
  double bp = std::min(1.0, std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)));
  return bp * std::exp(log_precision);
}

GleuResult gleu_corpus(std::span<const GleuInstance> instances, const GleuConfig& cfg, int jobs) {
  check_config(cfg);
  GleuResult result;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].references.empty()) throw UsageError("GLEU instance " + std::to_string(i) + " has no references");
    if (instances[i].hypothesis.empty()) ++result.empty_hypotheses;
  }
  auto table = gleu_table(instances, cfg.max_n, jobs);
  auto choices = sample_references(instances, cfg);

  // Instance-level score for every reference, reused across iterations.
  std::vector<std::vector<double>> instance_scores(instances.size());
  const std::size_t zero = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& st : table[i]) {
      GleuTable single{{st}};
      instance_scores[i].push_back(gleu_for_choice(single, std::span<const std::size_t>(&zero, 1), cfg));
    }
  }

  result.per_instance.assign(instances.size(), 0.0);
  double sum = 0.0;
  for (const auto& choice : choices) {
    double s = gleu_for_choice(table, choice, cfg);
    result.iteration_scores.push_back(s);
    sum += s;
    for (std::size_t i = 0; i < instances.size(); ++i) result.per_instance[i] += instance_scores[i][choice[i]];
  }
  const auto iters = static_cast<double>(choices.size());
  result.score = 100.0 * sum / iters;
  for (auto& v : result.per_instance) v = 100.0 * v / iters;
  return result;
}

GleuResult gleu_corpus(const std::vector<std::vector<std::string>>& sources,
                       const std::vector<std::vector<std::string>>& hypotheses,
                       const std::vector<std::vector<std::vector<std::string>>>& references, const GleuConfig& cfg,
                       int jobs) {
  if (sources.size() != hypotheses.size() || sources.size() != references.size()) {
    throw UsageError("GLEU input length mismatch: " + std::to_string(sources.size()) + " sources, " +
                     std::to_string(hypotheses.size()) + " hypotheses, " + std::to_string(references.size()) +
                     " reference sets");
  }
  std::vector<GleuInstance> instances(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) instances[i] = {sources[i], hypotheses[i], references[i]};
  return gleu_corpus(instances, cfg, jobs);
}

}  // namespace reveval
