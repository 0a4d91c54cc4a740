// Serial reference vs OpenMP kernels: one tightening round and the grid
// oracle. Thread count is the benchmark argument.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "polypart/incumbent.hpp"
#include "polypart/parser.hpp"
#include "polypart/testkit.hpp"
#include "polypart/tighten.hpp"

#ifndef POLYPART_SOURCE_DIR
#define POLYPART_SOURCE_DIR "."
#endif

using namespace polypart;

namespace {

struct RoundSetup {
  Model model;
  Incumbent incumbent;
  std::vector<int> variables;
};

const RoundSetup& nlp3() {
  static const RoundSetup s = [] {
    RoundSetup r;
    r.model = normalize(parse_file(std::string(POLYPART_SOURCE_DIR) + "/instances/nlp3.mlt"));
    r.incumbent = find_incumbent(r.model);
    r.variables = r.model.term_variables();
    return r;
  }();
  return s;
}

TightenConfig round_config(int threads) {
  TightenConfig c;
  c.mode = TightenMode::TCP;
  c.delta = 10.0;
  c.parallel_width = threads;
  return c;
}

void BM_TightenRoundSerial(benchmark::State& state) {
  const auto& s = nlp3();
  const auto cfg = round_config(1);
  for (auto _ : state) benchmark::DoNotOptimize(tighten_round_serial(s.model, s.incumbent, cfg, s.variables));
}

void BM_TightenRoundParallel(benchmark::State& state) {
  const auto& s = nlp3();
  const auto cfg = round_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tighten_round(s.model, s.incumbent, cfg, s.variables));
}

const Model& oracle_model() {
  static const Model m = [] {
    testkit::InstanceShape sh;
    sh.continuous = 3;
    sh.binaries = 2;
    sh.bilinear = 3;
    sh.quadratic = 1;
    sh.constraints = 3;
    return testkit::gen_random_instance(5, sh).model;
  }();
  return m;
}

void BM_OracleSerial(benchmark::State& state) {
  const Model& m = oracle_model();
  for (auto _ : state) benchmark::DoNotOptimize(testkit::oracle_minlp_serial(m));
}

void BM_OracleParallel(benchmark::State& state) {
  const Model& m = oracle_model();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(testkit::oracle_minlp(m));
}

}  // namespace

BENCHMARK(BM_TightenRoundSerial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TightenRoundParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleSerial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
