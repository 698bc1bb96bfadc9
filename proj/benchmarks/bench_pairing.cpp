#include "meroren/pairing.hpp"
#include "meroren/testfn.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace meroren;

namespace {

std::shared_ptr<TestFunction> bump(double c, double w) {
  return std::make_shared<TestFunction>(std::vector<BumpFactor>{{{1.0, 0.3}, c, w}});
}

// First evaluation builds the quadrature plan.
void BM_HyperPairingCold(benchmark::State& state) {
  auto phi = bump(0.2, 1.0);
  Complex mu[1] = {Complex(-0.5, 0.1)};
  for (auto _ : state) {
    HyperPairing h(phi, {1});
    benchmark::DoNotOptimize(h(mu));
  }
}
BENCHMARK(BM_HyperPairingCold)->Unit(benchmark::kMicrosecond);

// Contour sweeps reuse the plan.
void BM_HyperPairingWarm(benchmark::State& state) {
  auto phi = bump(0.2, 1.0);
  HyperPairing h(phi, {1});
  Complex mu[1] = {Complex(-0.5, 0.1)};
  benchmark::DoNotOptimize(h(mu));
  double t = 0.0;
  for (auto _ : state) {
    mu[0] = Complex(-0.5 + 0.01 * std::sin(t), 0.1);
    t += 0.1;
    benchmark::DoNotOptimize(h(mu));
  }
}
BENCHMARK(BM_HyperPairingWarm)->Unit(benchmark::kMicrosecond);

void BM_PowerPairingUV(benchmark::State& state) {
  auto phi = std::make_shared<TestFunction>(std::vector<BumpFactor>{{{1.0}, 0.1, 0.8}, {{1.0, -0.2}, -0.1, 0.7}});
  PowerPairing p({{"x", {0}}, {"x", {1}}}, phi);
  Complex l[2] = {Complex(-0.3, 0.05), Complex(0.2, -0.1)};
  benchmark::DoNotOptimize(p(l));
  for (auto _ : state) benchmark::DoNotOptimize(p(l));
}
BENCHMARK(BM_PowerPairingUV)->Unit(benchmark::kMicrosecond);

}  // namespace
