// Serial vs parallel kernels. Thread count follows DEVROLL_THREADS.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "devroll/cah.hpp"
#include "devroll/decomposition.hpp"
#include "devroll/leaf.hpp"

using namespace devroll;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_DerhamLattice(benchmark::State& state) {
  const auto m = product(catalog::sphere_stereo(1.0), catalog::euclidean(1));
  const auto [d1, d2] = factor_distributions(m);
  DerhamOptions o;
  o.points = 7;
  o.radius = 0.5;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(derham_local_isometry(m, d1, d2, Vec{{0.1, -0.2, 0.3}}, o));
}

void BM_CahWelldefined(benchmark::State& state) {
  const auto s = catalog::sphere_stereo(1.0);
  const auto phi = frame_isometry(s, s, Vec::Zero(2), Vec::Zero(2), Mat::Identity(2, 2));
  const PathFamily h(2, {"0.6*t - 0.4*u*sin(pi*t)", "0.2*t + 1.2*u*sin(pi*t)"});
  for (auto _ : state) benchmark::DoNotOptimize(cah_welldefined_check(s, s, phi, h, 9, {}, exec_of(state)));
}

std::vector<Vec> orbit_points() {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<Vec> pts;
  for (int k = 0; k < 20000; ++k) {
    const double t = 0.01 * k;
    pts.push_back(Vec{{-r * t / std::sqrt(1 + r * r), t / std::sqrt(1 + r * r)}});
  }
  return pts;
}

void BM_Coverage(benchmark::State& state) {
  const auto pts = orbit_points();
  for (auto _ : state) benchmark::DoNotOptimize(coverage_fraction(pts, {1.0, 1.0}, 0.05, 200, exec_of(state)));
}

void BM_CoverageReference(benchmark::State& state) {
  const auto pts = orbit_points();
  for (auto _ : state) benchmark::DoNotOptimize(coverage_fraction_reference(pts, {1.0, 1.0}, 0.05, 200));
}

}  // namespace

BENCHMARK(BM_DerhamLattice)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CahWelldefined)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coverage)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageReference)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
