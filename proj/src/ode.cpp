#include "devroll/ode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace devroll {

void validate(const IntegratorOpts& opts) {
  if (!(opts.step > 0.0) || !std::isfinite(opts.step)) throw InvalidArgument("integrator step must be positive");
  if (opts.max_steps == 0) throw InvalidArgument("max_steps must be positive");
  if (!(opts.tolerance > 0.0)) throw InvalidArgument("integrator tolerance must be positive");
  if (opts.sample_stride == 0) throw InvalidArgument("sample_stride must be positive");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::hit_boundary: return "hit_boundary";
    case StopReason::left_chart: return "left_chart";
    case StopReason::frame_degenerate: return "frame_degenerate";
    case StopReason::max_steps: return "max_steps";
  }
  return "?";
}

Vec rk4_step(const OdeSystem& sys, double t, double hint, const Vec& y, double h) {
  const int n = sys.size();
  Vec k1(n), k2(n), k3(n), k4(n);
  sys.rhs(t, hint, y, k1);
  sys.rhs(t + 0.5 * h, hint, y + (0.5 * h) * k1, k2);
  sys.rhs(t + 0.5 * h, hint, y + (0.5 * h) * k2, k3);
  sys.rhs(t + h, hint, y + h * k3, k4);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Runge-Kutta-Fehlberg 4(5): returns the fifth-order solution and the error estimate.
std::pair<Vec, double> rkf45_step(const OdeSystem& sys, double t, double hint, const Vec& y, double h, double tol) {
  const int n = sys.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n);
  sys.rhs(t, hint, y, k1);
  sys.rhs(t + h / 4.0, hint, y + h * (k1 / 4.0), k2);
  sys.rhs(t + 3.0 * h / 8.0, hint, y + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2), k3);
  sys.rhs(t + 12.0 * h / 13.0, hint, y + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3), k4);
  sys.rhs(t + h, hint, y + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 - 845.0 / 4104.0 * k4), k5);
  sys.rhs(t + h / 2.0, hint,
          y + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 + 1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5), k6);
  const Vec y5 = y + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 + 28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                          2.0 / 55.0 * k6);
  const Vec y4 = y + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 + 2197.0 / 4104.0 * k4 - 1.0 / 5.0 * k5);
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
  }
  return {y5, err};
}

enum class Admissible { ok, boundary, chart };

Admissible classify(const OdeSystem& sys, const std::optional<Vec>& y) {
  if (!y) return Admissible::chart;
  for (int i = 0; i < y->size(); ++i)
    if (!std::isfinite((*y)[i])) return Admissible::chart;
  if (!sys.in_chart(*y)) return Admissible::chart;
  if (!(sys.boundary(*y) > 0.0)) return Admissible::boundary;
  return Admissible::ok;
}

class Driver {
 public:
  Driver(const OdeSystem& sys, const IntegratorOpts& opts) : sys_(sys), opts_(opts) {}

  std::optional<Vec> try_step(double t, double hint, const Vec& y, double h) const {
    try {
      if (opts_.method == Method::rk4) return rk4_step(sys_, t, hint, y, h);
      return rkf45_step(sys_, t, hint, y, h, opts_.tolerance).first;
    } catch (const DomainError&) {
      return std::nullopt;
    }
  }

  OdeTrajectory run(const Vec& y0, std::span<const double> breaks) {
    if (breaks.size() < 2) throw InvalidArgument("integration needs at least one segment");
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] >= breaks[i - 1])) throw InvalidArgument("segment breaks must be non-decreasing");
    out_.t.push_back(breaks.front());
    out_.hint.push_back(segment_hint(breaks, 0));
    out_.y.push_back(y0);
    out_.t_stop = breaks.front();
    out_.max_condition = sys_.condition(y0);
    Vec y = y0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      const double a = breaks[s];
      const double b = breaks[s + 1];
      if (b == a) continue;
      const double hint = segment_hint(breaks, s);
      const bool done = opts_.method == Method::rk4 ? run_fixed(a, b, hint, y) : run_adaptive(a, b, hint, y);
      if (!done) return std::move(out_);
    }
    out_.reason = StopReason::completed;
    out_.t_stop = breaks.back();
    flush(out_.t_stop, segment_hint(breaks, breaks.size() - 2), y);
    return std::move(out_);
  }

 private:
  static double segment_hint(std::span<const double> breaks, std::size_t s) {
    return 0.5 * (breaks[s] + breaks[s + 1]);
  }

  // Returns false when integration stopped early.
  bool run_fixed(double a, double b, double hint, Vec& y) {
    const double len = b - a;
    const auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil(len / opts_.step - 1e-9)));
    const double h = len / static_cast<double>(nsteps);
    for (std::size_t k = 0; k < nsteps; ++k) {
      const double t = a + static_cast<double>(k) * h;
      const double t_next = k + 1 == nsteps ? b : a + static_cast<double>(k + 1) * h;
      if (!advance(t, t_next, hint, y)) return false;
    }
    return true;
  }

  bool run_adaptive(double a, double b, double hint, Vec& y) {
    double t = a;
    double h = std::min(opts_.step, b - a);
    while (t < b) {
      if (b - t < h) h = b - t;
      std::pair<Vec, double> trial;
      try {
        trial = rkf45_step(sys_, t, hint, y, h, opts_.tolerance);
      } catch (const DomainError&) {
        trial = {y, 0.0};
        if (h > kEventTolerance) {
          h *= 0.5;
          continue;
        }
      }
      if (trial.second > 1.0) {
        h *= std::max(0.2, 0.9 * std::pow(trial.second, -0.2));
        if (h < 1e-14) throw NumericalError("RKF45 step size underflow");
        continue;
      }
      const double t_next = (b - t <= h) ? b : t + h;
      if (!advance(t, t_next, hint, y)) return false;
      t = t_next;
      const double grow = trial.second > 0.0 ? 0.9 * std::pow(trial.second, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    }
    return true;
  }

  // One accepted step from t to t_next with event handling.
  bool advance(double t, double t_next, double hint, Vec& y) {
    if (out_.steps >= opts_.max_steps) {
      stop(StopReason::max_steps, t, hint, y);
      return false;
    }
    const double h = t_next - t;
    std::optional<Vec> y1 = try_step(t, hint, y, h);
    const Admissible state = classify(sys_, y1);
    if (state != Admissible::ok) {
      // Largest admissible step length by bisection.
      double lo = 0.0;
      double hi = h;
      Admissible why = state;
      while (hi - lo > kEventTolerance) {
        const double mid = 0.5 * (lo + hi);
        const Admissible c = classify(sys_, try_step(t, hint, y, mid));
        if (c == Admissible::ok) {
          lo = mid;
        } else {
          hi = mid;
          why = c;
        }
      }
      if (lo > 0.0) y = *try_step(t, hint, y, lo);
      ++out_.steps;
      stop(why == Admissible::boundary ? StopReason::hit_boundary : StopReason::left_chart, t + lo, hint, y);
      return false;
    }
    y = std::move(*y1);
    ++out_.steps;
    const double cond = sys_.condition(y);
    out_.max_condition = std::max(out_.max_condition, cond);
    if (!(cond <= kDegenerateCondition)) {
      stop(StopReason::frame_degenerate, t_next, hint, y);
      return false;
    }
    if (out_.steps % opts_.sample_stride == 0) record(t_next, hint, y);
    return true;
  }

  void record(double t, double hint, const Vec& y) {
    out_.t.push_back(t);
    out_.hint.push_back(hint);
    out_.y.push_back(y);
  }

  // Appends the final state unless it is already the last sample.
  void flush(double t, double hint, const Vec& y) {
    if (out_.t.back() != t) record(t, hint, y);
  }

  void stop(StopReason why, double t, double hint, const Vec& y) {
    out_.reason = why;
    out_.t_stop = t;
    flush(t, hint, y);
  }

  const OdeSystem& sys_;
  const IntegratorOpts& opts_;
  OdeTrajectory out_;
};

}  // namespace

OdeTrajectory integrate(const OdeSystem& sys, const Vec& y0, std::span<const double> breaks,
                        const IntegratorOpts& opts) {
  validate(opts);
  if (y0.size() != sys.size()) throw InvalidArgument("initial state has the wrong size");
  return Driver(sys, opts).run(y0, breaks);
}

}  // namespace devroll
