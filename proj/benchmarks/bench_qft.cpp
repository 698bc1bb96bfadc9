#include "meroren/qft.hpp"

#include <benchmark/benchmark.h>

using namespace meroren;

namespace {

VertexFunction vbump(double c, double w) { return VertexFunction::cartesian({{{1.0}, c, w}}); }

void BM_CorrelationDerivative(benchmark::State& state) {
  Correlation1D c(BumpFactor{{1.0, 0.3}, -1.0, 0.5}, BumpFactor{{1.0}, 1.0, 0.6});
  double x[1] = {-2.1};
  int k[1] = {static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(c.derivative(x, k));
}
BENCHMARK(BM_CorrelationDerivative)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_AmplitudeTwoPointD1(benchmark::State& state) {
  Spacetime s{1};
  std::vector<VertexFunction> phi{vbump(-1.0, 0.5), vbump(1.0, 0.6)};
  Complex lambda[1] = {Complex(-0.4, 0.2)};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        regularized_amplitude(s, PropagatorModel{}, AmplitudeSpec::two_point(2), lambda, phi));
}
BENCHMARK(BM_AmplitudeTwoPointD1)->Unit(benchmark::kMillisecond);

void BM_AmplitudeLightConeD2(benchmark::State& state) {
  Spacetime s{2};
  std::vector<VertexFunction> phi{VertexFunction::light_cone({{{1.0}, -1.5, 0.5}, {{1.0}, -1.5, 0.5}}),
                                  VertexFunction::light_cone({{{1.0}, 1.5, 0.5}, {{1.0}, 1.4, 0.6}})};
  Complex lambda[1] = {Complex(-0.3, 0.1)};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        regularized_amplitude(s, PropagatorModel{}, AmplitudeSpec::two_point(1), lambda, phi));
}
BENCHMARK(BM_AmplitudeLightConeD2)->Unit(benchmark::kMillisecond);

void BM_SyngeExact(benchmark::State& state) {
  Spacetime s{2};
  QVec x{Rational(1, 3), Rational(-2, 7)}, y{Rational(5, 4), Rational(3, 11)};
  for (auto _ : state) benchmark::DoNotOptimize(synge_identity_defect(s, x, y));
}
BENCHMARK(BM_SyngeExact);

}  // namespace
BENCHMARK_MAIN();
