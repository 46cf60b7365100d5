// Copyright 2026 The ctmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenMP kernels next to their serial references. On one core the two
// should time the same; the gap shows the threading overhead.

#include <benchmark/benchmark.h>

#include "ctmp/dt_mpqp.hpp"
#include "ctmp/explorer.hpp"
#include "ctmp/io.hpp"

namespace {

ctmp::LtiOcProblem example(int k) {
  return ctmp::load_problem(std::string(CTMP_DATA_DIR) + "/example" + std::to_string(k) + ".prob");
}

void BM_ClassifyGrid(benchmark::State& state) {
  const ctmp::LtiOcProblem p = example(2);
  const int n = static_cast<int>(state.range(0));
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) {
    auto g = parallel ? ctmp::classify_grid(p, {n, n}) : ctmp::classify_grid_serial(p, {n, n});
    benchmark::DoNotOptimize(g.label.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
  state.SetLabel(parallel ? "omp" : "serial");
}
BENCHMARK(BM_ClassifyGrid)->Args({11, 0})->Args({11, 1})->Args({21, 0})->Args({21, 1})
    ->Unit(benchmark::kMillisecond);

void BM_GridSeeded(benchmark::State& state) {
  const ctmp::DtProblem dt = ctmp::discretize_zoh(example(2), static_cast<int>(state.range(0)));
  ctmp::PartitionOptions o;
  o.grid = {401, 401};
  o.parallel = state.range(1) != 0;
  for (auto _ : state) {
    auto part = ctmp::enumerate_partition(dt, o);
    benchmark::DoNotOptimize(part.regions.data());
  }
  state.SetLabel(o.parallel ? "omp" : "serial");
}
BENCHMARK(BM_GridSeeded)->Args({8, 0})->Args({8, 1})->Args({20, 0})->Args({20, 1})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
