// devroll - splitting checks for complementary parallel distributions
//
// parallelogram_check compares the three developments
//   dev(p, v)(t),  dev(dev(p, v1)(t), v2)(t),  dev(dev(p, v2)(t), v1)(t),   v = v1 + v2,
// and measures the transport around the two closed curves they bound. The tail
// curve of a composite development is carried to the junction by the stored
// frame, identifying a vector with its parallel displacement.
//
// derham_local_isometry samples f(w1, w2) = dev(dev(p, w1)(1), w2)(1) on a lattice
// of adapted orthonormal coordinates and compares the pulled-back metric with the
// product of the leaf metrics.

#ifndef DEVROLL_DECOMPOSITION_HPP
#define DEVROLL_DECOMPOSITION_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/distribution.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"
#include "devroll/parallel.hpp"
#include "devroll/transport.hpp"

namespace devroll {

// Operator 2-norm of H - I with H expressed in a g-orthonormal frame at p
// (g = C C^T, H_on = C^T H C^-T).
double holonomy_deviation(const Mat& g, const Mat& transport);

struct SplitReport {
  double endpoint_mismatch = 0.0;
  double holonomy_deviation = 0.0;
  StopReason status = StopReason::completed;
  std::string failed_leg;  // empty when every leg completed
  // dev(p,v), dev(p,v1), dev(q1,v2), dev(p,v2), dev(q2,v1); frames of the second
  // legs are relative to the coordinate frame at their own base point.
  std::vector<DevelopmentResult> legs;

  bool completed() const noexcept { return status == StopReason::completed; }
};

SplitReport parallelogram_check(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                const ChartPoint& p, const TangentCurve& v1, const TangentCurve& v2, double t,
                                const IntegratorOpts& opts = {});

using Quadruple = std::array<Vec, 4>;

// Gaussian quadruples of coordinate vectors, reproducible from the seed.
std::vector<Quadruple> random_quadruples(int n, std::size_t count, std::uint64_t seed);

// max |R(X,Y,Z,W) - R(X1,Y1,Z1,W1) - R(X2,Y2,Z2,W2)| over the quadruples.
double curvature_split_check(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                             const ChartPoint& p, const std::vector<Quadruple>& quadruples);

struct InvarianceReport {
  double residual = 0.0;   // max |R(X1,Y1,Z1,W1) - R(PX1,PY1,PZ1,PW1)|
  double tangency = 0.0;   // max |(I - P2) gamma'|_g / (1 + |gamma'|_g)
  StopReason status = StopReason::completed;
};

inline constexpr double kTangencyTolerance = 1e-8;

// The quadruples are projected onto D1 at the start of the path. The residual is
// evaluated at `checkpoints` evenly spaced samples along the path (and its end).
// Throws InvalidArgument when the path is not tangential to D2.
InvarianceReport curvature_transport_invariance_check(const ChartManifold& m, const Distribution& d1,
                                                      const Distribution& d2, const ChartPath& path,
                                                      const std::vector<Quadruple>& quadruples,
                                                      const IntegratorOpts& opts = {}, int checkpoints = 8);

struct DerhamOptions {
  int points = 11;      // lattice points per axis
  double radius = 0.5;  // lattice half-width; only nodes in the ball |w| <= radius are used
  Exec exec = Exec::parallel;
  IntegratorOpts integrator{};
};

struct DerhamNode {
  Vec w;               // adapted orthonormal coordinates (s, sigma)
  bool active = false; // inside the ball of the lattice radius
  bool valid = false;  // every development completed
  ChartPoint f;        // dev(dev(p, w1)(1), w2)(1)
  ChartPoint f_swapped;// dev(dev(p, w2)(1), w1)(1)
  ChartPoint h1;       // dev(p, w1)(1)
  ChartPoint h2;       // dev(p, w2)(1)
};

struct DerhamReport {
  Mat basis1, basis2;  // g-orthonormal bases of D1(p), D2(p) (columns)
  double spacing = 0.0;
  std::vector<int> shape;  // points per axis
  std::vector<DerhamNode> nodes;
  double pullback_residual = 0.0;  // max |Gram(f) - diag(Gram(h1), Gram(h2))|
  double order_mismatch = 0.0;     // max |f - f_swapped|
  std::size_t cells = 0;           // nodes where the pullback was evaluated
  std::size_t invalid = 0;         // nodes with a truncated development
};

DerhamReport derham_local_isometry(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                   const ChartPoint& p, const DerhamOptions& opts = {});

}  // namespace devroll

#endif  // DEVROLL_DECOMPOSITION_HPP
