// Serial reference vs OpenMP kernels on synthetic inputs.
//   ./reveval_bench --benchmark_filter=Gleu

#include <benchmark/benchmark.h>

#include "reveval/gleu.hpp"
#include "reveval/irc.hpp"
#include "reveval/random.hpp"

using namespace reveval;

namespace {

std::vector<std::string> words(Rng& rng, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.below(300)));
  return out;
}

const std::vector<GleuInstance>& gleu_instances() {
  static const auto inst = [] {
    Rng rng(1);
    std::vector<GleuInstance> v(2000);
    for (auto& g : v) {
      g.source = words(rng, 60);
      g.hypothesis = g.source;
      for (int k = 0; k < 4; ++k) {
        auto r = g.source;
        for (int e = 0; e < 6; ++e) r[rng.below(r.size())] = "w" + std::to_string(rng.below(300));
        g.references.push_back(std::move(r));
      }
    }
    return v;
  }();
  return inst;
}

std::vector<SnippetPair> pairs(std::size_t n) {
  Rng rng(2);
  std::vector<SnippetPair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].doc_id = "D" + std::to_string(i);
    out[i].source = "source text " + std::to_string(rng.next());
    out[i].revised = "revised " + std::to_string(rng.next());
    out[i].aspect.aspect = kAllAspects[i % kAspectCount];
  }
  return out;
}

void BM_GleuTableSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(gleu_table_serial(gleu_instances(), 4));
}

void BM_GleuTableParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(gleu_table(gleu_instances(), 4, static_cast<int>(st.range(0))));
}

void BM_IrcSerial(benchmark::State& st) {
  auto p = pairs(20000);
  RandomMetric m(1);
  EvalOptions o;
  o.bootstrap_resamples = 200;
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_metric_serial(m, p, o));
}

void BM_IrcParallel(benchmark::State& st) {
  auto p = pairs(20000);
  EvalOptions o;
  o.bootstrap_resamples = 200;
  o.jobs = static_cast<int>(st.range(0));
  auto make = [] { return std::make_unique<RandomMetric>(1); };
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_metric(make, p, o));
}

}  // namespace

BENCHMARK(BM_GleuTableSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GleuTableParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IrcSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IrcParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
