// devroll - fixed-step RK4 / adaptive RKF45 driver with boundary and chart events

#ifndef DEVROLL_ODE_HPP
#define DEVROLL_ODE_HPP

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "devroll/core.hpp"

namespace devroll {

enum class Method { rk4, rkf45 };

struct IntegratorOpts {
  double step = 1e-3;            // RK4 step; initial step for RKF45
  Method method = Method::rk4;
  std::size_t max_steps = 50'000'000;
  double tolerance = 1e-10;      // RKF45 absolute and relative error target
  std::size_t sample_stride = 1; // keep every k-th accepted step (the last one is always kept)
};

void validate(const IntegratorOpts& opts);

enum class StopReason { completed, hit_boundary, left_chart, frame_degenerate, max_steps };

const char* to_string(StopReason r);

inline constexpr double kEventTolerance = 1e-12;
inline constexpr double kDegenerateCondition = 1e12;

// Right-hand side y' = f(t, y). hint is a time strictly inside the integration
// segment being stepped, so piecewise data can pick the correct one-sided value at
// breakpoints.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;
  virtual int size() const = 0;
  // May throw DomainError, which is reported as leaving the chart.
  virtual void rhs(double t, double hint, const Vec& y, Vec& dy) const = 0;
  // Positive in the interior, crossing zero at the boundary.
  virtual double boundary(const Vec& y) const {
    (void)y;
    return std::numeric_limits<double>::infinity();
  }
  virtual bool in_chart(const Vec& y) const {
    (void)y;
    return true;
  }
  virtual double condition(const Vec& y) const {
    (void)y;
    return 1.0;
  }
};

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<double> hint;  // segment hint under which each sample was reached
  std::vector<Vec> y;
  StopReason reason = StopReason::completed;
  double t_stop = 0.0;
  std::size_t steps = 0;
  double max_condition = 1.0;
};

// Single classical RK4 step.
Vec rk4_step(const OdeSystem& sys, double t, double hint, const Vec& y, double h);

// Integrates over consecutive segments [breaks[i], breaks[i+1]]. RK4 uses
// ceil(length / step) equal steps per segment. Boundary crossings and chart exits
// are located by bisection on the step length to kEventTolerance and stop the
// integration at the last admissible time.
OdeTrajectory integrate(const OdeSystem& sys, const Vec& y0, std::span<const double> breaks,
                        const IntegratorOpts& opts);

}  // namespace devroll

#endif  // DEVROLL_ODE_HPP
