// Shared helpers for the test binaries.
#ifndef DEVROLL_TESTS_SUPPORT_HPP
#define DEVROLL_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "devroll/core.hpp"

namespace testing {

// Random smooth expression over x0..x{n-1} and t, finite on all of R^n.
inline std::string random_expression(std::mt19937_64& rng, int n_vars, int depth) {
  std::uniform_int_distribution<int> pick_leaf(0, n_vars + 1);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  auto leaf = [&]() -> std::string {
    const int k = pick_leaf(rng);
    if (k < n_vars) return "x" + std::to_string(k);
    if (k == n_vars) return "t";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", coef(rng));
    return std::string("(") + buf + ")";
  };
  if (depth <= 0) return leaf();
  std::uniform_int_distribution<int> pick(0, 13);
  const auto a = [&] { return random_expression(rng, n_vars, depth - 1); };
  switch (pick(rng)) {
    case 0: return leaf();
    case 1: return a() + " + " + a();
    case 2: return a() + " - " + a();
    case 3: return "(" + a() + ")*(" + a() + ")";
    case 4: return "(" + a() + ")/(2 + cos(" + a() + "))";
    case 5: return "-(" + a() + ")";
    case 6: return "(" + a() + ")^" + std::to_string(2 + static_cast<int>(rng() % 2));
    case 7: return "sin(" + a() + ")";
    case 8: return "cos(" + a() + ")";
    case 9: return "exp(sin(" + a() + "))";
    case 10: return "log(2 + tanh(" + a() + "))";
    case 11: return "sqrt(1 + (" + a() + ")^2)";
    case 12: return "tanh(" + a() + ")";
    default: return "atan(" + a() + ")";
  }
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace testing

#endif
