// devroll - tracing leaves of a parallel distribution
//
// A leaf through p is traced as the development of a steering curve confined to
// D(p); since D is parallel the development stays tangential to D. On manifolds
// with periodic coordinates the trace reports how close the leaf returns to p and
// how densely its projection fills the torus of periodic coordinates.

#ifndef DEVROLL_LEAF_HPP
#define DEVROLL_LEAF_HPP

#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/distribution.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"
#include "devroll/parallel.hpp"
#include "devroll/transport.hpp"

namespace devroll {

struct LeafOptions {
  double t_min = 1.0;       // returns are searched for t >= t_min
  double epsilon = 0.05;    // coverage ball radius (chart units)
  int coverage_grid = 200;  // probe points per periodic axis
  Exec exec = Exec::parallel;
  IntegratorOpts integrator{};
};

struct LeafReport {
  DevelopmentResult trajectory;
  double tangency = 0.0;  // max |(I - P) gamma'|_g / |gamma'|_g
  bool periodic = false;  // recurrence statistics were computed
  double min_return_distance = 0.0;
  double return_time = 0.0;
  double coverage_fraction = 0.0;
};

LeafReport leaf_trace(const ChartManifold& m, const Distribution& d, const TangentCurve& steering,
                      const LeafOptions& opts = {});

// Fraction of a probe lattice (cell centres, `grid` per axis) on the torus
// prod [0, periods[a]) lying within eps of some point; distances are periodic.
// Uses a bucket grid of cell size >= eps.
double coverage_fraction(const std::vector<Vec>& points, const std::vector<double>& periods, double eps, int grid,
                         Exec exec = Exec::parallel);

// Brute-force reference of coverage_fraction.
double coverage_fraction_reference(const std::vector<Vec>& points, const std::vector<double>& periods, double eps,
                                   int grid);

}  // namespace devroll

#endif  // DEVROLL_LEAF_HPP
