// devroll - curves in a tangent space and curves in the chart
//
// TangentCurve is a curve v : [0, T] -> T_pM (components against the coordinate
// basis at its base point). ChartPath is a curve in the chart itself, used for
// parallel transport along prescribed paths.

#ifndef DEVROLL_CURVE_HPP
#define DEVROLL_CURVE_HPP

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/expr.hpp"
#include "devroll/manifold.hpp"

namespace devroll {

namespace detail {
struct CurveSource;
struct PathSource;
}  // namespace detail

class TangentCurve {
 public:
  using Function = std::function<Vec(double)>;

  static TangentCurve constant(ChartPoint base, Vec value, double horizon);
  // Components are expressions in t (no coordinates).
  static TangentCurve expressions(ChartPoint base, std::vector<expr::Expr> components, double horizon);
  // breaks = {0 = b0 < b1 < ... < bm = T}; values[i] holds on [b_i, b_{i+1}).
  static TangentCurve piecewise_constant(ChartPoint base, std::vector<double> breaks, std::vector<Vec> values);
  // Cubic Hermite through (times[i], values[i]); times[0] = 0. Derivatives are
  // estimated by three-point differences when not supplied.
  static TangentCurve hermite(ChartPoint base, std::vector<double> times, std::vector<Vec> values,
                              std::vector<Vec> derivatives = {});
  static TangentCurve function(ChartPoint base, double horizon, Function value, Function derivative = {});

  const ChartPoint& base() const noexcept { return base_; }
  int dim() const noexcept { return static_cast<int>(base_.size()); }
  double horizon() const noexcept { return horizon_; }

  // hint selects the piece at breakpoints: a time inside the wanted piece.
  Vec value(double t, double hint) const;
  Vec value(double t) const { return value(t, t); }
  Vec derivative(double t, double hint) const;
  Vec derivative(double t) const { return derivative(t, t); }

  // 0, interior breakpoints, horizon.
  std::vector<double> breaks() const;

  // s -> v(t0 + s) on [0, T - t0].
  TangentCurve tail(double t0) const;
  // Restriction to [0, t1].
  TangentCurve head(double t1) const;
  // s -> map * v(s), based at new_base.
  TangentCurve mapped(const Mat& map, ChartPoint new_base) const;
  // Pointwise sum; both curves share base and horizon.
  TangentCurve operator+(const TangentCurve& other) const;
  TangentCurve scaled(double factor) const;

 private:
  TangentCurve(ChartPoint base, double horizon, std::shared_ptr<const detail::CurveSource> src, double offset,
               std::optional<Mat> map);

  ChartPoint base_;
  double horizon_ = 0.0;
  std::shared_ptr<const detail::CurveSource> src_;
  double offset_ = 0.0;
  std::optional<Mat> map_;
};

class ChartPath {
 public:
  // Cubic Hermite interpolation through chart samples (velocities estimated).
  static ChartPath samples(std::vector<double> times, std::vector<ChartPoint> points);
  // Coordinates as expressions in t (and u, fixed to u_value); exact velocities by AD.
  static ChartPath expressions(std::vector<expr::Expr> components, double t_begin, double t_end, double u_value = 0.0);
  static ChartPath function(double t_begin, double t_end, TangentCurve::Function position,
                            TangentCurve::Function velocity);

  double t_begin() const noexcept { return t0_; }
  double t_end() const noexcept { return t1_; }
  int dim() const;
  ChartPoint position(double t) const;
  Vec velocity(double t) const;

 private:
  ChartPath(double t0, double t1, std::shared_ptr<const detail::PathSource> src)
      : t0_(t0), t1_(t1), src_(std::move(src)) {}
  double t0_ = 0.0;
  double t1_ = 0.0;
  std::shared_ptr<const detail::PathSource> src_;
};

// Cubic Hermite interpolation helper shared by curves and paths.
class HermiteSpline {
 public:
  HermiteSpline(std::vector<double> times, std::vector<Vec> values, std::vector<Vec> derivatives = {});
  Vec value(double t) const;
  Vec derivative(double t) const;
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  int dim() const { return static_cast<int>(values_.front().size()); }

 private:
  std::size_t locate(double t) const;
  std::vector<double> times_;
  std::vector<Vec> values_;
  std::vector<Vec> derivs_;
};

}  // namespace devroll

#endif  // DEVROLL_CURVE_HPP
