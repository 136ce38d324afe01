#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "devroll/variation.hpp"
#include "support.hpp"

using namespace devroll;
using testing::max_abs;

namespace {

constexpr double pi = std::numbers::pi;

double oracle_gap(const ChartManifold& m, const VariationFamily& fam, double u0, double du) {
  const VariationField f = solve_variation(m, fam, u0);
  const FdVariation fd = variation_fd_oracle(m, fam, u0, du);
  REQUIRE(fd.U.size() == f.samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < fd.U.size(); ++k) worst = std::max(worst, max_abs(fd.U[k] - f.samples[k].U));
  return worst;
}

double max_skew(const VariationField& f) {
  double s = 0.0;
  for (const auto& x : f.samples) s = std::max(s, max_abs(x.X + x.X.transpose()));
  return s;
}

}  // namespace

TEST_CASE("flat families integrate explicitly") {
  const auto e2 = catalog::euclidean(2);
  const VariationFamily fam(e2, Vec::Zero(2), {"u*t", "u^2 + t"});
  const VariationField f = solve_variation(e2, fam, 0.5);
  CHECK(f.completed());
  CHECK(f.samples.front().U == Vec::Zero(2));
  CHECK(f.samples.front().X == Mat::Zero(2, 2));
  CHECK(max_abs(f.samples.front().dU - Vec{{0.0, 1.0}}) <= 1e-12);
  for (const auto& s : f.samples) {
    CHECK(max_abs(s.U - Vec{{0.5 * s.t * s.t, s.t}}) <= 1e-9);
    CHECK(max_abs(s.X) == 0.0);
  }
  CHECK(oracle_gap(e2, fam, 0.5, 1e-4) <= 1e-8);
}

TEST_CASE("constant-in-u family has no variation") {
  const auto s = catalog::sphere_stereo(1.0);
  const VariationFamily fam(s, Vec{{0.2, 0.1}}, {"0.5*cos(t)", "0.5*sin(t)"});
  const VariationField f = solve_variation(s, fam, 0.3);
  for (const auto& x : f.samples) {
    CHECK(max_abs(x.U) <= 1e-10);
    CHECK(max_abs(x.X) <= 1e-10);
  }
}

TEST_CASE("sphere Jacobi field has magnitude sin t") {
  const auto s = catalog::sphere_stereo(1.0);
  const VariationFamily fam(s, Vec::Zero(2), {"cos(u)", "sin(u)"}, std::nullopt, 3.0);
  const VariationField f = solve_variation(s, fam, 0.0);
  CHECK(f.completed());
  double worst = 0.0;
  for (const auto& x : f.samples) worst = std::max(worst, std::abs(x.U.norm() - std::sin(x.t)));
  CHECK(worst <= 1e-5);
  CHECK(max_skew(f) <= 1e-7);
  CHECK(f.max_skew == doctest::Approx(max_skew(f)));
  CHECK(oracle_gap(s, fam, 0.0, 1e-4) <= 1e-5);
}

TEST_CASE("oracle agreement on curved families") {
  struct Case {
    ChartManifold m;
    Vec p;
    std::vector<std::string> v;
    double u0;
  };
  const std::vector<Case> cases = {
      {catalog::sphere_stereo(1.0), Vec{{0.3, -0.1}}, {"cos(u) + 0.3*t*u", "sin(u)*(1 + 0.2*sin(t))"}, 0.4},
      {catalog::hyperbolic_halfplane(), Vec{{0.0, 1.0}}, {"cos(u*t)", "0.5*sin(u) + 0.1*t"}, 0.7},
      {catalog::sphere_stereo(2.0, 3), Vec{{0.1, 0.2, 0.3}}, {"cos(u)", "sin(u)*cos(t)", "0.3*u*t"}, 0.2},
      {product(catalog::sphere_stereo(1.0), catalog::euclidean(1)), Vec{{0.1, 0.0, 0.0}},
       {"cos(u)", "sin(u)", "u*t"}, 0.1},
  };
  for (const auto& c : cases) {
    INFO(c.m.name());
    const VariationFamily fam(c.m, c.p, c.v);
    const VariationField f = solve_variation(c.m, fam, c.u0);
    CHECK(f.completed());
    CHECK(max_skew(f) <= 1e-7);
    CHECK(oracle_gap(c.m, fam, c.u0, 1e-4) <= 1e-5);
  }
}

TEST_CASE("oracle error shrinks quadratically in du") {
  const auto s = catalog::sphere_stereo(1.0);
  const VariationFamily fam(s, Vec{{0.3, -0.1}}, {"cos(u) + 0.3*t*u", "sin(u)*(1 + 0.2*sin(t))"});
  const double a = oracle_gap(s, fam, 0.4, 0.04);
  const double b = oracle_gap(s, fam, 0.4, 0.02);
  CHECK(a > 1e-6);
  CHECK(a / b == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("endpoint-fixed families have U(1) = 0") {
  const auto e2 = catalog::euclidean(2);
  const VariationFamily flat(e2, Vec::Zero(2), {"1", "u*sin(2*pi*t)"});
  CHECK(max_abs(solve_variation(e2, flat, 0.3).samples.back().U) <= 1e-6);

  // every geodesic of length pi from p ends at the antipode
  const auto s = catalog::sphere_stereo(1.0);
  const VariationFamily sphere(s, Vec{{0.5, 0.0}}, {"pi*cos(u)", "pi*sin(u)"});
  const VariationField f = solve_variation(s, sphere, pi / 2.0);
  CHECK(f.completed());
  CHECK(max_abs(f.samples.back().U) <= 1e-6);
  CHECK(max_abs(f.samples[f.samples.size() / 2].U) > 0.1);
}

TEST_CASE("family validation") {
  const auto s = catalog::sphere_stereo(1.0);
  CHECK_THROWS_AS(VariationFamily(s, Vec::Zero(2), {"u"}), InvalidArgument);
  CHECK_THROWS_AS(VariationFamily(s, Vec::Zero(2), {"u", "t"}, Mat::Identity(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(VariationFamily(s, Vec::Zero(2), {"u", "x0"}), ParseError);
  CHECK_NOTHROW(VariationFamily(s, Vec::Zero(2), {"u", "t"}, Mat(0.5 * Mat::Identity(2, 2))));
  const Mat b = orthonormal_basis(s, Vec{{0.3, 0.4}});
  CHECK(max_abs(b * s.metric_at(Vec{{0.3, 0.4}}) * b.transpose() - Mat::Identity(2, 2)) <= 1e-14);
}
