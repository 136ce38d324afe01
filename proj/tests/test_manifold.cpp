#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <random>

#include "devroll/manifold.hpp"
#include "support.hpp"

using namespace devroll;
using testing::max_abs;

namespace {

struct Sampled {
  ChartManifold m;
  std::function<Vec(std::mt19937_64&)> sample;
};

std::vector<Sampled> catalog_with_samplers() {
  auto box = [](std::vector<std::pair<double, double>> ranges) {
    return [ranges](std::mt19937_64& rng) {
      Vec x(static_cast<int>(ranges.size()));
      for (std::size_t i = 0; i < ranges.size(); ++i)
        x[static_cast<int>(i)] = std::uniform_real_distribution<double>(ranges[i].first, ranges[i].second)(rng);
      return x;
    };
  };
  return {
      {catalog::euclidean(3), box({{-5, 5}, {-5, 5}, {-5, 5}})},
      {catalog::sphere_stereo(1.0), box({{-1.4, 1.4}, {-1.4, 1.4}})},
      {catalog::sphere_stereo(2.5, 3), box({{-2, 2}, {-2, 2}, {-2, 2}})},
      {catalog::hyperbolic_halfplane(), box({{-3, 3}, {0.2, 3}})},
      {catalog::flat_torus(2), box({{0, 1}, {0, 1}})},
      {catalog::slab(2.0), box({{0.01, 1.99}})},
      {catalog::slab_torus(0.618), box({{0.01, 0.99}, {-4, 4}, {-4, 4}})},
      {product(catalog::sphere_stereo(1.0), catalog::hyperbolic_halfplane()), box({{-1, 1}, {-1, 1}, {-1, 1}, {0.3, 2}})},
      {catalog::from_expressions(2, {{"1", "0"}, {"0", "x0^2"}}, "x0 > 0", "", "polar"), box({{0.3, 3}, {-3, 3}})},
  };
}

}  // namespace

TEST_CASE("closed-form metrics") {
  const Vec z2 = Vec::Zero(2);
  CHECK(max_abs(catalog::euclidean(2).metric_at(Vec::Constant(2, 3.7)) - Mat::Identity(2, 2)) == 0.0);
  const auto h = catalog::hyperbolic_halfplane();
  CHECK(max_abs(h.metric_at(Vec::Unit(2, 1)) - Mat::Identity(2, 2)) <= 1e-15);
  CHECK(max_abs(h.metric_at(2.0 * Vec::Unit(2, 1)) - 0.25 * Mat::Identity(2, 2)) <= 1e-15);
  CHECK(max_abs(catalog::sphere_stereo(1.0).metric_at(z2) - 4.0 * Mat::Identity(2, 2)) <= 1e-15);
  CHECK_THROWS_AS(h.metric_at(Vec::Zero(2)), DomainError);
}

TEST_CASE("catalog metrics are symmetric positive definite and metric-compatible") {
  std::mt19937_64 rng(3);
  for (const auto& [m, sample] : catalog_with_samplers()) {
    INFO(m.name());
    const int n = m.dim();
    for (int k = 0; k < 100; ++k) {
      const Vec x = sample(rng);
      const Mat g = m.metric_at(x);
      CHECK(max_abs(g - g.transpose()) == 0.0);
      CHECK(is_positive_definite(g));
      const MetricJet jet = m.metric_jet(x);
      const Christoffel gam = m.christoffel(x);
      double sym = 0.0, compat = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) sym = std::max(sym, std::abs(gam(a, b, c) - gam(a, c, b)));
      for (int kk = 0; kk < n; ++kk)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double r = jet.dg[static_cast<std::size_t>(kk)](i, j);
            for (int l = 0; l < n; ++l) r -= gam(l, kk, i) * g(l, j) + gam(l, kk, j) * g(i, l);
            compat = std::max(compat, std::abs(r));
          }
      CHECK(sym == 0.0);
      CHECK(compat <= 1e-8);
    }
  }
}

TEST_CASE("hyperbolic Christoffel symbols by hand") {
  const auto h = catalog::hyperbolic_halfplane();
  for (double y : {0.3, 1.0, 2.7}) {
    const Christoffel g = h.christoffel(Vec{{0.4, y}});
    CHECK(g(0, 0, 1) == doctest::Approx(-1.0 / y));
    CHECK(g(0, 1, 0) == doctest::Approx(-1.0 / y));
    CHECK(g(1, 0, 0) == doctest::Approx(1.0 / y));
    CHECK(g(1, 1, 1) == doctest::Approx(-1.0 / y));
    CHECK(g(0, 0, 0) == 0.0);
    CHECK(g(0, 1, 1) == 0.0);
    CHECK(g(1, 0, 1) == 0.0);
  }
}

TEST_CASE("curvature") {
  std::mt19937_64 rng(5);
  for (const auto& [m, sample] : catalog_with_samplers()) {
    INFO(m.name());
    for (int k = 0; k < 10; ++k) {
      const CurvatureTensor r = m.curvature_at(sample(rng));
      CHECK(r.antisymmetry_residual() <= 1e-6);
      CHECK(r.pair_symmetry_residual() <= 1e-6);
      CHECK(r.bianchi_residual() <= 1e-6);
    }
  }
  CHECK(catalog::euclidean(3).curvature_at(Vec::Constant(3, 0.3)).max_abs() <= 1e-10);
  const auto polar = catalog::from_expressions(2, {{"1", "0"}, {"0", "x0^2"}}, "x0 > 0");
  CHECK(polar.curvature_at(Vec{{1.3, 0.2}}).max_abs() <= 1e-6);

  // constant sectional curvature on random planes
  std::normal_distribution<double> nd;
  auto randv = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
  };
  for (const auto& [m, k] : {std::pair{catalog::sphere_stereo(1.0, 3), 1.0},
                             std::pair{catalog::sphere_stereo(2.0), 0.25},
                             std::pair{catalog::hyperbolic_halfplane(), -1.0}}) {
    for (int s = 0; s < 20; ++s) {
      Vec x = 0.5 * randv(m.dim());
      if (m.name().find("hyperbolic") != std::string::npos) x[1] = 0.5 + std::abs(x[1]);
      const CurvatureTensor r = m.curvature_at(x);
      CHECK(std::abs(r.sectional(m.metric_at(x), randv(m.dim()), randv(m.dim())) - k) <= 1e-6);
    }
  }
}

TEST_CASE("products") {
  const auto e11 = product(catalog::euclidean(1), catalog::euclidean(1));
  CHECK(e11.dim() == 2);
  CHECK(max_abs(e11.metric_at(Vec{{0.3, -2.0}}) - Mat::Identity(2, 2)) == 0.0);

  const auto sp = product(catalog::sphere_stereo(1.0), catalog::euclidean(1));
  CHECK(sp.dim() == 3);
  const Vec x{{0.3, -0.4, 7.0}};
  const Mat g = sp.metric_at(x);
  CHECK(max_abs(g.topLeftCorner(2, 2) - catalog::sphere_stereo(1.0).metric_at(x.head(2))) == 0.0);
  CHECK(g(2, 2) == 1.0);
  CHECK(max_abs(g.topRightCorner(2, 1)) == 0.0);
  const Christoffel gam = sp.christoffel(x);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        if (a == 2 || b == 2 || c == 2) CHECK(gam(a, b, c) == 0.0);

  CHECK_THROWS_AS(product(catalog::slab(1.0), catalog::slab(1.0)), InvalidArgument);
  const auto sb = product(catalog::slab(1.0), catalog::euclidean(1));
  CHECK(sb.has_boundary());
  CHECK(sb.inside(Vec{{0.0, 3.0}}) == Location::boundary);
}

TEST_CASE("boundary classification") {
  const auto st = catalog::slab_torus(0.618);
  CHECK(st.inside(Vec{{0.5, 3.0, -1.0}}) == Location::interior);
  CHECK(st.inside(Vec{{0.0, 3.0, -1.0}}) == Location::boundary);
  CHECK(st.inside(Vec{{1.0, 3.0, -1.0}}) == Location::boundary);
  CHECK(st.inside(Vec{{5e-11, 0.0, 0.0}}) == Location::boundary);
  CHECK(st.inside(Vec{{-0.1, 0.0, 0.0}}) == Location::outside);
  CHECK(catalog::euclidean(2).inside(Vec{{1e9, -1e9}}) == Location::interior);
  CHECK(catalog::hyperbolic_halfplane().inside(Vec{{0.0, -1.0}}) == Location::outside);
}

TEST_CASE("expression metrics") {
  const auto hx = catalog::from_expressions(2, {{"1/x1^2", "0"}, {"0", "1/x1^2"}}, "x1 > 0");
  const auto hb = catalog::hyperbolic_halfplane();
  const Vec x{{0.2, 0.8}};
  CHECK(max_abs(hx.metric_at(x) - hb.metric_at(x)) <= 1e-15);
  const Christoffel a = hx.christoffel(x), b = hb.christoffel(x);
  for (std::size_t i = 0; i < a.raw().size(); ++i) CHECK(std::abs(a.raw()[i] - b.raw()[i]) <= 1e-12);
  CHECK_THROWS_AS(catalog::from_expressions(2, {{"1", "x0"}, {"0", "1"}}, ""), InvalidArgument);
  CHECK_THROWS_AS(catalog::from_expressions(2, {{"1", "0"}}, ""), InvalidArgument);
  CHECK_THROWS_AS(catalog::from_expressions(1, {{"x1"}}, ""), ParseError);

  const auto torus = catalog::flat_torus(2);
  CHECK(torus.chart_distance(Vec{{0.95, 0.0}}, Vec{{0.05, 0.0}}, true) == doctest::Approx(0.1));
  CHECK(torus.chart_distance(Vec{{0.95, 0.0}}, Vec{{0.05, 0.0}}, false) == doctest::Approx(0.9));
}
