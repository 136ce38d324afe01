// devroll - the slab-torus counterexample
//
// M = [0,1] x R^2/Z^2 with the flat metric carries the complementary parallel
// distributions T1 = span{d_t, d_x + r d_y} and T2 = span{-r d_x + d_y}. Locally M
// splits along them; for irrational r the T2 leaves never close, so no global
// product decomposition along T1, T2 exists.

#ifndef DEVROLL_COUNTEREXAMPLE_HPP
#define DEVROLL_COUNTEREXAMPLE_HPP

#include "devroll/decomposition.hpp"
#include "devroll/distribution.hpp"
#include "devroll/leaf.hpp"

namespace devroll {

struct CounterexampleOptions {
  double arclength = 200.0;
  int lattice_points = 5;     // per axis, local isometry lattice
  double lattice_radius = 0.4;
  double epsilon = 0.05;
  Exec exec = Exec::parallel;
  IntegratorOpts integrator{};
};

inline constexpr double kClosedOrbitTolerance = 1e-6;

struct CounterexampleReport {
  double r = 0.0;
  ChartPoint base;
  ParallelReport parallel_t1;
  ParallelReport parallel_t2;
  SplitReport parallelogram;
  DerhamReport derham;
  LeafReport leaf;
  bool orbit_closes = false;  // min return distance <= kClosedOrbitTolerance
};

// Requires r in [0, 1).
CounterexampleReport demo_counterexample(double r, const CounterexampleOptions& opts = {});

}  // namespace devroll

#endif  // DEVROLL_COUNTEREXAMPLE_HPP
