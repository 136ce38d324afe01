// devroll - distributions given by projector fields
//
// A rank-k distribution D is stored as the field of g-orthogonal projectors P(x)
// onto D(x), acting on coordinate component vectors: P^2 = P, g P symmetric,
// trace P = k.

#ifndef DEVROLL_DISTRIBUTION_HPP
#define DEVROLL_DISTRIBUTION_HPP

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"

namespace devroll {

inline constexpr double kProjectorTolerance = 1e-10;

struct ProjectorResidual {
  double idempotence = 0.0;  // max |P^2 - P|
  double symmetry = 0.0;     // max |g P - (g P)^T|
  double trace = 0.0;        // |trace P - k|
  double max() const { return std::max({idempotence, symmetry, trace}); }
};

class Distribution {
 public:
  using Field = std::function<Mat(const ChartPoint&)>;

  // Projector entries as expressions in the coordinates.
  static Distribution expressions(int n, const std::vector<std::vector<std::string>>& entries, int rank,
                                  std::string name = "expr");
  static Distribution constant(Mat projector, int rank, std::string name = "constant");
  // D(x) = span of fixed coordinate vectors, projected g(x)-orthogonally.
  static Distribution span(const ChartManifold& m, std::vector<Vec> vectors, std::string name = "span");
  static Distribution field(int n, int rank, Field projector, std::string name = "field");

  int dim() const noexcept { return n_; }
  int rank() const noexcept { return rank_; }
  const std::string& name() const noexcept { return name_; }

  Mat projector(const ChartPoint& x) const;
  // g-orthogonal complement: I - P.
  Distribution complement() const;

  // g(x)-orthonormal basis of D(x) as columns.
  Mat basis(const ChartManifold& m, const ChartPoint& x) const;
  ProjectorResidual check(const ChartManifold& m, const ChartPoint& x) const;

 private:
  Distribution(int n, int rank, Field f, std::string name)
      : n_(n), rank_(rank), field_(std::move(f)), name_(std::move(name)) {}
  int n_ = 0;
  int rank_ = 0;
  Field field_;
  std::string name_;
};

// Coordinate factor distributions of a product manifold (first, second).
std::pair<Distribution, Distribution> factor_distributions(const ChartManifold& product);

// T1 = span{d_t, d_x + r d_y}, T2 = span{-r d_x + d_y} on slab_torus(r).
std::pair<Distribution, Distribution> slab_torus_distributions(double r);

// (P1 w, P2 w); requires P1 + P2 = identity at the base point.
std::pair<Tangent, Tangent> split_tangent(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                          const Tangent& w);

struct ParallelReport {
  double residual = 0.0;  // max_t max_i |(I - P(gamma(t))) F(t)^T X_i|_g, X_i orthonormal in D(start)
  StopReason status = StopReason::completed;
};

ParallelReport check_parallel(const ChartManifold& m, const Distribution& d, const ChartPath& path,
                              const IntegratorOpts& opts = {});

// Checks v(s) in image P(p) at the curve's breaks and a uniform probe grid.
// Returns the largest relative violation |(I - P) v| / (1 + |v|).
double membership_residual(const ChartManifold& m, const Distribution& d, const TangentCurve& v);

}  // namespace devroll

#endif  // DEVROLL_DISTRIBUTION_HPP
