#pragma once

// Corpus-level GLEU with sampled multi-reference selection: in every
// iteration one reference is drawn per instance, n-gram statistics are summed
// over the corpus and combined as
//
//   p_n   = max(eps, sum(|hyp ∩ ref|_n) - sum(|hyp ∩ (src - ref)|_n)) / sum(|hyp|_n)
//   score = BP * exp(sum_n ln(p_n) / N),   BP = min(1, exp(1 - r/h))
//
// where ∩ and - are multiset operations on n-gram counts. The result is
// 100 times the mean over iterations.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reveval {

struct GleuConfig {
  int max_n = 4;
  int iterations = 500;
  std::uint64_t seed = 0;
  double epsilon_floor = 1e-9;
};

struct GleuInstance {
  std::vector<std::string> source;
  std::vector<std::string> hypothesis;
  std::vector<std::vector<std::string>> references;
};

// Sufficient statistics of one (instance, reference) combination.
struct GleuStats {
  long hyp_len = 0;
  long ref_len = 0;
  std::vector<long> matches;    // per n: clipped hyp/ref matches
  std::vector<long> penalties;  // per n: hyp n-grams also in src but not in ref
  std::vector<long> totals;     // per n: hyp n-gram count

  bool operator==(const GleuStats&) const = default;
};

// [instance][reference]
using GleuTable = std::vector<std::vector<GleuStats>>;

GleuStats gleu_statistics(const std::vector<std::string>& source, const std::vector<std::string>& hypothesis,
                          const std::vector<std::string>& reference, int max_n);

GleuTable gleu_table(std::span<const GleuInstance> instances, int max_n, int jobs = 0);
GleuTable gleu_table_serial(std::span<const GleuInstance> instances, int max_n);

// [iteration][instance] reference index drawn for that iteration.
std::vector<std::vector<std::size_t>> sample_references(std::span<const GleuInstance> instances, const GleuConfig& cfg);

// Score in [0, 1] for one fixed choice of references.
double gleu_for_choice(const GleuTable& table, std::span<const std::size_t> choice, const GleuConfig& cfg);

struct GleuResult {
  double score = 0.0;                   // [0, 100]
  std::vector<double> iteration_scores;  // [0, 1] per iteration
  std::vector<double> per_instance;      // [0, 100], instance-level GLEU averaged over iterations
  std::size_t empty_hypotheses = 0;
};

// Throws UsageError on an empty reference set.
GleuResult gleu_corpus(std::span<const GleuInstance> instances, const GleuConfig& cfg, int jobs = 0);

// Parallel-list form; throws UsageError on length mismatch.
GleuResult gleu_corpus(const std::vector<std::vector<std::string>>& sources,
                       const std::vector<std::vector<std::string>>& hypotheses,
                       const std::vector<std::vector<std::vector<std::string>>>& references, const GleuConfig& cfg,
                       int jobs = 0);

}  // namespace reveval
