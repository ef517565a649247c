#include <cmath>
#include <string>

#include <benchmark/benchmark.h>

#include "softbody/ahp.hpp"

namespace {

using namespace softbody::ahp;

// Consistent n x n matrix built from weights 1..n.
ComparisonMatrix consistent(std::size_t n) {
  ComparisonMatrix m;
  m.entries.assign(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m.labels.push_back("c" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) m.entries[i][j] = static_cast<double>(i + 1) / static_cast<double>(j + 1);
  }
  return m;
}

void Priority(benchmark::State& state) {
  const auto m = consistent(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(priority_vector(m));
}

void CostValue(benchmark::State& state) {
  const auto m = consistent(static_cast<std::size_t>(state.range(0)));
  const auto v = priority_vector(m);
  const auto c = priority_vector(m);
  for (auto _ : state) benchmark::DoNotOptimize(cost_value_points(v, c));
}

BENCHMARK(Priority)->Arg(4)->Arg(16)->Arg(128);
BENCHMARK(CostValue)->Arg(4)->Arg(16)->Arg(128);

}  // namespace
