// devroll - developments, geodesics and parallel transport
//
// The development of v : [0,T] -> T_pM is integrated as the coupled system for
// the position x(t) and the parallel frame F(t), where row i of F holds the
// coordinate components of the parallel extension E_i of d/dx^i|_p:
//
//   dx^i/dt    = v^j F_j^i
//   dF_i^j/dt  = -F_i^k (dx^l/dt) Gamma^j_{kl}(x)
//   x(0) = p,  F(0) = identity.
//
// Parallel transport from p to gamma(t) maps coordinate components X to F(t)^T X.

#ifndef DEVROLL_TRANSPORT_HPP
#define DEVROLL_TRANSPORT_HPP

#include <cstddef>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"

namespace devroll {

struct DevelopmentSample {
  double t = 0.0;
  ChartPoint x;
  Mat frame;     // row i = E_i in coordinates
  Vec velocity;  // gamma'(t) in coordinates
};

struct DevelopmentResult {
  std::vector<DevelopmentSample> samples;
  StopReason status = StopReason::completed;
  double t_stop = 0.0;          // horizon, or the time integration stopped
  double max_gram_drift = 0.0;  // max |F g F^T - (F g F^T)(first sample)|
  double max_condition = 1.0;   // largest frame condition number seen
  std::size_t steps = 0;

  bool completed() const noexcept { return status == StopReason::completed; }
  const DevelopmentSample& front() const { return samples.front(); }
  const DevelopmentSample& back() const { return samples.back(); }
  // Parallel transport matrix from the first sample's tangent space to sample k.
  Mat transport(std::size_t k) const { return samples[k].frame.transpose(); }
};

// Development right-hand side for a state segment [x (n), F (n*n, row major)].
void development_rhs(const Christoffel& gamma, const Vec& v, const double* state, double* dstate, int n);

// Frame derivative along a prescribed velocity: F_i' = -Gamma(F_i, xdot).
void transport_rhs(const Christoffel& gamma, const Vec& xdot, const double* frame, double* dframe, int n);

DevelopmentResult develop(const ChartManifold& m, const TangentCurve& v, const IntegratorOpts& opts = {});

// Constant-velocity development: t -> exp_p(t v0).
DevelopmentResult geodesic(const ChartManifold& m, const ChartPoint& p, const Vec& v0, double horizon,
                           const IntegratorOpts& opts = {});

// State of the development of v at time t0, re-integrated from the nearest
// stored sample when t0 falls between samples.
DevelopmentSample state_at(const ChartManifold& m, const DevelopmentResult& result, const TangentCurve& v, double t0,
                           const IntegratorOpts& opts = {});

// Continues the development of v from its state at t0: the tail s -> v(t0 + s) is
// carried to gamma(t0) by the stored frame and developed there. Times and frames
// of the result are expressed against the original base point, so its samples
// continue those of result on [t0, T].
DevelopmentResult restart(const ChartManifold& m, const DevelopmentResult& result, const TangentCurve& v, double t0,
                          const IntegratorOpts& opts = {});

// Frames transported along a prescribed chart path, starting from the identity.
DevelopmentResult transport_along(const ChartManifold& m, const ChartPath& path, const IntegratorOpts& opts = {});

// Parallel transport of X0 from path(t_begin) to path(t_end).
Vec parallel_transport(const ChartManifold& m, const ChartPath& path, const Vec& x0, const IntegratorOpts& opts = {});

// max over samples of |F g(x) F^T - G0|, G0 the Gram matrix of the first sample.
double gram_drift(const ChartManifold& m, const DevelopmentResult& result);

// Chart path that interpolates a development's samples (cubic Hermite with the
// stored velocities).
ChartPath path_of(const DevelopmentResult& result);

}  // namespace devroll

#endif  // DEVROLL_TRANSPORT_HPP
