#include "meroren/germ.hpp"
#include "meroren/germ_parser.hpp"
#include "meroren/laurent.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace meroren;

namespace {

void BM_ParseGerm(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_germ("(l1^2+3*l2)/(l1*l2*(l1+l2))", 2));
}
BENCHMARK(BM_ParseGerm);

void BM_ProjectPiDependent(benchmark::State& state) {
  auto g = parse_germ("(1+l1+l2^2)/(l1*l2*(l1+l2)*(l1-l2))", 2);
  for (auto _ : state) benchmark::DoNotOptimize(project_pi(g));
}
BENCHMARK(BM_ProjectPiDependent);

void BM_ProjectPiThreeVars(benchmark::State& state) {
  auto g = parse_germ("(l1*l2*l3+l1+2)/(l1^2*(l2+l3)*(l1+l2+l3))", 3);
  for (auto _ : state) benchmark::DoNotOptimize(project_pi(g));
}
BENCHMARK(BM_ProjectPiThreeVars);

void BM_LaurentExtract1D(benchmark::State& state) {
  PoleSet poles;
  poles[LinearForm::coordinate(1, 0)] = 2;
  auto f = [](std::span<const Complex> l) { return std::exp(l[0]) / (l[0] * l[0]); };
  for (auto _ : state) benchmark::DoNotOptimize(laurent_extract(f, {0}, poles));
}
BENCHMARK(BM_LaurentExtract1D)->Unit(benchmark::kMicrosecond);

void BM_LaurentExtract2D(benchmark::State& state) {
  PoleSet poles;
  poles[LinearForm::coordinate(2, 0)] = 1;
  poles[LinearForm::coordinate(2, 1)] = 1;
  auto f = [](std::span<const Complex> l) { return 1.0 / (l[0] * l[1]) + std::exp(l[0] + 2.0 * l[1]); };
  for (auto _ : state) benchmark::DoNotOptimize(laurent_extract(f, {0, 0}, poles));
}
BENCHMARK(BM_LaurentExtract2D)->Unit(benchmark::kMillisecond);

}  // namespace
