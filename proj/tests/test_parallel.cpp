#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

#include "devroll/cah.hpp"
#include "devroll/decomposition.hpp"
#include "devroll/leaf.hpp"
#include "devroll/parallel.hpp"

using namespace devroll;

TEST_CASE("thread count honours DEVROLL_THREADS") {
  ::setenv("DEVROLL_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  ::setenv("DEVROLL_THREADS", "0", 1);
  CHECK(thread_count() >= 1);
  ::setenv("DEVROLL_THREADS", "junk", 1);
  CHECK(thread_count() >= 1);
  ::unsetenv("DEVROLL_THREADS");
  CHECK(thread_count() >= 1);
}

TEST_CASE("for_each_index visits every index once and rethrows the lowest failure") {
  for (Exec e : {Exec::serial, Exec::parallel}) {
    std::vector<std::atomic<int>> hits(257);
    for_each_index(hits.size(), e, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);

    try {
      for_each_index(64, e, [](std::size_t i) {
        if (i == 17 || i == 40) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& err) {
      CHECK(std::string(err.what()) == "index 17");
    }
  }
}

TEST_CASE("de Rham lattice: serial and parallel agree bit for bit") {
  ::setenv("DEVROLL_THREADS", "4", 1);
  const auto m = product(catalog::sphere_stereo(1.0), catalog::euclidean(1));
  const auto [d1, d2] = factor_distributions(m);
  DerhamOptions o;
  o.points = 5;
  o.radius = 0.3;
  o.exec = Exec::serial;
  const auto a = derham_local_isometry(m, d1, d2, Vec{{0.1, 0.2, 0.0}}, o);
  o.exec = Exec::parallel;
  const auto b = derham_local_isometry(m, d1, d2, Vec{{0.1, 0.2, 0.0}}, o);
  CHECK(a.pullback_residual == b.pullback_residual);
  CHECK(a.order_mismatch == b.order_mismatch);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    CHECK(a.nodes[k].valid == b.nodes[k].valid);
    if (a.nodes[k].valid) CHECK(a.nodes[k].f == b.nodes[k].f);
  }
  ::unsetenv("DEVROLL_THREADS");
}

TEST_CASE("homotopy slices: serial and parallel agree bit for bit") {
  const auto s = catalog::sphere_stereo(1.0);
  const auto phi = frame_isometry(s, s, Vec::Zero(2), Vec::Zero(2), Mat::Identity(2, 2));
  const PathFamily h(2, {"0.6*t - 0.4*u*sin(pi*t)", "0.2*t + 1.2*u*sin(pi*t)"});
  const auto a = cah_welldefined_check(s, s, phi, h, 6, {}, Exec::serial);
  const auto b = cah_welldefined_check(s, s, phi, h, 6, {}, Exec::parallel);
  CHECK(a.spread == b.spread);
  CHECK(a.max_tau_residual == b.max_tau_residual);
  for (std::size_t k = 0; k < a.endpoints.size(); ++k) CHECK(a.endpoints[k] == b.endpoints[k]);
}

TEST_CASE("coverage: bucketed parallel count equals the brute-force reference") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(0.0, 3.0);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Vec> pts;
    const int count = 50 + 200 * trial;
    for (int k = 0; k < count; ++k) pts.push_back(Vec{{c(rng), -c(rng)}});
    const std::vector<double> periods{1.0, 1.0};
    const double ref = coverage_fraction_reference(pts, periods, 0.05, 60);
    CHECK(coverage_fraction(pts, periods, 0.05, 60, Exec::serial) == ref);
    CHECK(coverage_fraction(pts, periods, 0.05, 60, Exec::parallel) == ref);
  }
  // one point covers exactly the cell-centred probes within eps: count them directly
  int inside = 0;
  for (int i = -10; i < 10; ++i)
    for (int j = -10; j < 10; ++j) inside += (i + 0.5) * (i + 0.5) + (j + 0.5) * (j + 0.5) <= 25.0;
  const double one = coverage_fraction_reference({Vec{{0.0, 0.0}}}, {1.0, 1.0}, 0.05, 100);
  CHECK(one == doctest::Approx(inside / 10000.0));
}

TEST_CASE("leaf trace: serial and parallel coverage agree") {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto st = catalog::slab_torus(r);
  const auto [t1, t2] = slab_torus_distributions(r);
  const Vec p{{0.5, 0.0, 0.0}};
  const double n = std::sqrt(1.0 + r * r);
  const auto steer = TangentCurve::constant(p, Vec{{0.0, -r / n, 1.0 / n}}, 50.0);
  LeafOptions o;
  o.exec = Exec::serial;
  const auto a = leaf_trace(st, t2, steer, o);
  o.exec = Exec::parallel;
  const auto b = leaf_trace(st, t2, steer, o);
  CHECK(a.coverage_fraction == b.coverage_fraction);
  CHECK(a.min_return_distance == b.min_return_distance);
}
