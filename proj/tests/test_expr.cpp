#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <random>
#include <thread>
#include <vector>

#include "devroll/expr.hpp"
#include "support.hpp"

using devroll::DomainError;
using devroll::ParseError;
using devroll::Vec;
using devroll::expr::Expr;
using devroll::expr::Op;
using devroll::expr::Predicate;

namespace {

double ev(const char* s, std::vector<double> x, double t = 0.0) {
  return Expr::parse(s, static_cast<int>(x.size())).eval(x, t);
}

std::size_t offset_of(const char* s, int n) {
  try {
    (void)Expr::parse(s, n);
  } catch (const ParseError& e) {
    return e.offset();
  }
  FAIL("expected a parse error for " << s);
  return 0;
}

}  // namespace

TEST_CASE("structure and precedence") {
  const Expr e = Expr::parse("x0*x0 + sin(x1)", 2);
  CHECK(e.root().op == Op::add);
  // exponents are integer literals, so chained powers read left to right
  CHECK(ev("2^3^2", {}) == doctest::Approx(64.0));
  CHECK(ev("-2^2", {}) == doctest::Approx(-4.0));
  CHECK(ev("8/4/2", {}) == doctest::Approx(1.0));
  CHECK(ev("10-4-3", {}) == doctest::Approx(3.0));
  CHECK(ev("2+3*4", {}) == doctest::Approx(14.0));
  CHECK(ev("x0+2*x1", {1, 2}) == 5.0);
  CHECK(ev("sin(t)", {}, 0.0) == 0.0);
  CHECK(ev("1.5e1 + .5", {}) == doctest::Approx(15.5));
  CHECK(ev("pi", {}) == doctest::Approx(M_PI));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK(offset_of("x0 + * 2", 1) == 5);
  CHECK(offset_of("(x0 + 1", 1) == 7);
  CHECK(offset_of("x0 $ 1", 1) == 3);
  CHECK_THROWS_AS(Expr::parse("x3", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(x0)", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin(x0, x0)", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("x0^1.5", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("u", 0), ParseError);
  CHECK_NOTHROW(Expr::parse("u*t", 0, true));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(ev("1/x0", {0.0}), DomainError);
  CHECK_THROWS_AS(ev("log(x0)", {-1.0}), DomainError);
  CHECK_THROWS_AS(ev("log(x0)", {0.0}), DomainError);
  CHECK_THROWS_AS(ev("sqrt(x0)", {-1e-3}), DomainError);
  CHECK_THROWS_AS(ev("x0^-1", {0.0}), DomainError);
}

TEST_CASE("gradients") {
  {
    const auto [v, g] = Expr::parse("x0^2", 1).eval_with_grad(std::vector<double>{3.0}, 0.0);
    CHECK(v == 9.0);
    CHECK(g[0] == doctest::Approx(6.0));
  }
  {
    const auto [v, g] = Expr::parse("sin(x0)*x1", 2).eval_with_grad(std::vector<double>{0.0, 5.0}, 0.0);
    CHECK(v == 0.0);
    CHECK(g[0] == doctest::Approx(5.0));
    CHECK(g[1] == 0.0);
  }
  {
    const Expr e = Expr::parse("exp(x0*x1)", 2);
    const std::vector<double> x{0.3, 0.7};
    const auto [v, g] = e.eval_with_grad(x, 0.0);
    for (int i = 0; i < 2; ++i) {
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += 1e-6;
      xm[static_cast<std::size_t>(i)] -= 1e-6;
      CHECK(std::abs(g[i] - (e.eval(xp, 0.0) - e.eval(xm, 0.0)) / 2e-6) <= 1e-8);
    }
  }
  {
    // d/dt and d/du slots
    const Expr e = Expr::parse("u*t^2", 0, true);
    const auto d = e.eval_dual({}, 2.0, 3.0);
    CHECK(d.value == doctest::Approx(12.0));
    CHECK(d.partials[Expr::t_slot(0)] == doctest::Approx(12.0));
    CHECK(d.partials[Expr::u_slot(0)] == doctest::Approx(4.0));
  }
}

TEST_CASE("random expressions: AD against central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  constexpr int n = 3;
  for (int k = 0; k < 100; ++k) {
    const std::string src = testing::random_expression(rng, n, 4);
    const Expr e = Expr::parse(src, n);
    std::vector<double> x(n);
    for (auto& xi : x) xi = coord(rng);
    const double t = coord(rng);
    const auto [v, g] = e.eval_with_grad(x, t);
    for (int i = 0; i < n; ++i) {
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += 1e-6;
      xm[static_cast<std::size_t>(i)] -= 1e-6;
      const double fd = (e.eval(xp, t) - e.eval(xm, t)) / 2e-6;
      INFO(src);
      CHECK(std::abs(g[i] - fd) <= 1e-6 * (1.0 + std::abs(g[i])));
    }
  }
}

TEST_CASE("print then parse is idempotent") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Expr e = Expr::parse(testing::random_expression(rng, 2, 4), 2);
    const Expr again = Expr::parse(e.print(), 2);
    CHECK(e.structurally_equal(again));
    CHECK(again.print() == e.print());
  }
}

TEST_CASE("evaluation is deterministic across threads") {
  const Expr e = Expr::parse("exp(sin(x0*x1)) / (2 + cos(t)) + atan(x1)^3", 2);
  const std::vector<double> x{0.37, -1.2};
  const double ref = e.eval(x, 0.4);
  std::array<double, 4> out{};
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < out.size(); ++i)
    threads.emplace_back([&, i] {
      for (int r = 0; r < 1000; ++r) out[i] = e.eval(x, 0.4);
    });
  for (auto& th : threads) th.join();
  for (double v : out) CHECK(v == ref);
}

TEST_CASE("predicates") {
  const Predicate p = Predicate::parse("x0 > 0 && x1 <= 1", 2);
  CHECK(p.holds(std::vector<double>{0.5, 1.0}));
  CHECK_FALSE(p.holds(std::vector<double>{-0.5, 0.0}));
  CHECK_FALSE(p.holds(std::vector<double>{0.5, 1.5}));
  CHECK_THROWS_AS(Predicate::parse("x0 >", 1), ParseError);
}
