#include "devroll/curve.hpp"

#include <algorithm>
#include <cmath>

namespace devroll {

namespace detail {

struct CurveSource {
  virtual ~CurveSource() = default;
  virtual int dim() const = 0;
  virtual Vec value(double t, double hint) const = 0;
  virtual Vec derivative(double t, double hint) const = 0;
  // Interior breakpoints where the curve may be discontinuous.
  virtual std::vector<double> kinks() const { return {}; }
};

struct PathSource {
  virtual ~PathSource() = default;
  virtual int dim() const = 0;
  virtual Vec position(double t) const = 0;
  virtual Vec velocity(double t) const = 0;
};

}  // namespace detail

namespace {

using detail::CurveSource;
using detail::PathSource;

void check_horizon(double horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("curve horizon must be finite and >= 0");
}

struct ConstantSource : CurveSource {
  explicit ConstantSource(Vec v) : v(std::move(v)) {}
  int dim() const override { return static_cast<int>(v.size()); }
  Vec value(double, double) const override { return v; }
  Vec derivative(double, double) const override { return Vec::Zero(v.size()); }
  Vec v;
};

struct ExpressionSource : CurveSource {
  explicit ExpressionSource(std::vector<expr::Expr> c) : comps(std::move(c)) {}
  int dim() const override { return static_cast<int>(comps.size()); }
  Vec value(double t, double) const override {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = comps[static_cast<std::size_t>(i)].eval({}, t);
    return v;
  }
  Vec derivative(double t, double) const override {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i)
      v[i] = comps[static_cast<std::size_t>(i)].eval_dual({}, t).partials[static_cast<std::size_t>(expr::Expr::t_slot(0))];
    return v;
  }
  std::vector<expr::Expr> comps;
};

struct PiecewiseSource : CurveSource {
  PiecewiseSource(std::vector<double> b, std::vector<Vec> v) : breaks(std::move(b)), values(std::move(v)) {}
  int dim() const override { return static_cast<int>(values.front().size()); }
  std::size_t piece(double hint) const {
    const auto it = std::upper_bound(breaks.begin() + 1, breaks.end() - 1, hint);
    return static_cast<std::size_t>(it - (breaks.begin() + 1));
  }
  Vec value(double, double hint) const override { return values[piece(hint)]; }
  Vec derivative(double, double) const override { return Vec::Zero(dim()); }
  std::vector<double> kinks() const override { return {breaks.begin() + 1, breaks.end() - 1}; }
  std::vector<double> breaks;
  std::vector<Vec> values;
};

struct HermiteSource : CurveSource {
  explicit HermiteSource(HermiteSpline s) : spline(std::move(s)) {}
  int dim() const override { return spline.dim(); }
  Vec value(double t, double) const override { return spline.value(t); }
  Vec derivative(double t, double) const override { return spline.derivative(t); }
  HermiteSpline spline;
};

struct FunctionSource : CurveSource {
  FunctionSource(int n, TangentCurve::Function v, TangentCurve::Function d)
      : n(n), value_fn(std::move(v)), deriv_fn(std::move(d)) {}
  int dim() const override { return n; }
  Vec value(double t, double) const override { return value_fn(t); }
  Vec derivative(double t, double) const override {
    if (deriv_fn) return deriv_fn(t);
    // Central difference fallback.
    const double h = 1e-6 * std::max(1.0, std::abs(t));
    return (value_fn(t + h) - value_fn(t - h)) / (2.0 * h);
  }
  int n;
  TangentCurve::Function value_fn;
  TangentCurve::Function deriv_fn;
};

struct SumSource : CurveSource {
  SumSource(TangentCurve a, TangentCurve b) : a(std::move(a)), b(std::move(b)) {}
  int dim() const override { return a.dim(); }
  Vec value(double t, double hint) const override { return a.value(t, hint) + b.value(t, hint); }
  Vec derivative(double t, double hint) const override { return a.derivative(t, hint) + b.derivative(t, hint); }
  std::vector<double> kinks() const override {
    std::vector<double> k;
    for (const auto* c : {&a, &b}) {
      const auto br = c->breaks();
      k.insert(k.end(), br.begin() + 1, br.end() - 1);
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }
  TangentCurve a;
  TangentCurve b;
};

struct HermitePath : PathSource {
  explicit HermitePath(HermiteSpline s) : spline(std::move(s)) {}
  int dim() const override { return spline.dim(); }
  Vec position(double t) const override { return spline.value(t); }
  Vec velocity(double t) const override { return spline.derivative(t); }
  HermiteSpline spline;
};

struct ExpressionPath : PathSource {
  ExpressionPath(std::vector<expr::Expr> c, double u) : comps(std::move(c)), u(u) {}
  int dim() const override { return static_cast<int>(comps.size()); }
  Vec position(double t) const override {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = comps[static_cast<std::size_t>(i)].eval({}, t, u);
    return v;
  }
  Vec velocity(double t) const override {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i)
      v[i] = comps[static_cast<std::size_t>(i)].eval_dual({}, t, u).partials[static_cast<std::size_t>(expr::Expr::t_slot(0))];
    return v;
  }
  std::vector<expr::Expr> comps;
  double u;
};

struct FunctionPath : PathSource {
  FunctionPath(int n, TangentCurve::Function p, TangentCurve::Function v) : n(n), pos(std::move(p)), vel(std::move(v)) {}
  int dim() const override { return n; }
  Vec position(double t) const override { return pos(t); }
  Vec velocity(double t) const override { return vel(t); }
  int n;
  TangentCurve::Function pos;
  TangentCurve::Function vel;
};

// Three-point derivative estimates on a non-uniform grid.
std::vector<Vec> estimate_derivatives(const std::vector<double>& t, const std::vector<Vec>& y) {
  const std::size_t m = t.size();
  std::vector<Vec> d(m);
  if (m == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (t[1] - t[0]);
    return d;
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    d[i] = (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1];
  }
  {
    const double h0 = t[1] - t[0];
    const double h1 = t[2] - t[1];
    d[0] = (-(2.0 * h0 + h1) / (h0 * (h0 + h1))) * y[0] + ((h0 + h1) / (h0 * h1)) * y[1] - (h0 / (h1 * (h0 + h1))) * y[2];
  }
  {
    const double h0 = t[m - 2] - t[m - 3];
    const double h1 = t[m - 1] - t[m - 2];
    d[m - 1] = (h1 / (h0 * (h0 + h1))) * y[m - 3] - ((h0 + h1) / (h0 * h1)) * y[m - 2] +
               ((2.0 * h1 + h0) / (h1 * (h0 + h1))) * y[m - 1];
  }
  return d;
}

}  // namespace

HermiteSpline::HermiteSpline(std::vector<double> times, std::vector<Vec> values, std::vector<Vec> derivatives)
    : times_(std::move(times)), values_(std::move(values)), derivs_(std::move(derivatives)) {
  if (times_.size() < 2) throw InvalidArgument("interpolation needs at least two samples");
  if (values_.size() != times_.size()) throw InvalidArgument("sample times and values differ in length");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw InvalidArgument("sample times must be strictly increasing");
  for (const auto& v : values_)
    if (v.size() != values_.front().size()) throw InvalidArgument("samples have inconsistent dimension");
  if (derivs_.empty()) derivs_ = estimate_derivatives(times_, values_);
  if (derivs_.size() != times_.size()) throw InvalidArgument("sample derivatives differ in length");
}

std::size_t HermiteSpline::locate(double t) const {
  const auto it = std::upper_bound(times_.begin() + 1, times_.end() - 1, t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

Vec HermiteSpline::value(double t) const {
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * values_[i] + (s3 - 2 * s2 + s) * h * derivs_[i] + (-2 * s3 + 3 * s2) * values_[i + 1] +
         (s3 - s2) * h * derivs_[i + 1];
}

Vec HermiteSpline::derivative(double t) const {
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * values_[i] + (-6 * s2 + 6 * s) * values_[i + 1]) / h + (3 * s2 - 4 * s + 1) * derivs_[i] +
         (3 * s2 - 2 * s) * derivs_[i + 1];
}

TangentCurve::TangentCurve(ChartPoint base, double horizon, std::shared_ptr<const CurveSource> src, double offset,
                           std::optional<Mat> map)
    : base_(std::move(base)), horizon_(horizon), src_(std::move(src)), offset_(offset), map_(std::move(map)) {
  check_horizon(horizon_);
  const int n = map_ ? static_cast<int>(map_->rows()) : src_->dim();
  if (n != base_.size()) throw InvalidArgument("curve dimension does not match its base point");
}

TangentCurve TangentCurve::constant(ChartPoint base, Vec value, double horizon) {
  return TangentCurve(std::move(base), horizon, std::make_shared<ConstantSource>(std::move(value)), 0.0, std::nullopt);
}

TangentCurve TangentCurve::expressions(ChartPoint base, std::vector<expr::Expr> components, double horizon) {
  for (const auto& c : components)
    if (c.n_vars() != 0 || c.allows_u()) throw InvalidArgument("curve components must be expressions in t only");
  return TangentCurve(std::move(base), horizon, std::make_shared<ExpressionSource>(std::move(components)), 0.0,
                      std::nullopt);
}

TangentCurve TangentCurve::piecewise_constant(ChartPoint base, std::vector<double> breaks, std::vector<Vec> values) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size())
    throw InvalidArgument("piecewise curve needs m+1 breaks for m values");
  if (breaks.front() != 0.0) throw InvalidArgument("piecewise curve must start at t = 0");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) throw InvalidArgument("piecewise breaks must be strictly increasing");
  const double horizon = breaks.back();
  return TangentCurve(std::move(base), horizon, std::make_shared<PiecewiseSource>(std::move(breaks), std::move(values)),
                      0.0, std::nullopt);
}

TangentCurve TangentCurve::hermite(ChartPoint base, std::vector<double> times, std::vector<Vec> values,
                                   std::vector<Vec> derivatives) {
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("sampled curve must start at t = 0");
  const double horizon = times.back();
  HermiteSpline spline(std::move(times), std::move(values), std::move(derivatives));
  return TangentCurve(std::move(base), horizon, std::make_shared<HermiteSource>(std::move(spline)), 0.0, std::nullopt);
}

TangentCurve TangentCurve::function(ChartPoint base, double horizon, Function value, Function derivative) {
  const int n = static_cast<int>(base.size());
  return TangentCurve(std::move(base), horizon, std::make_shared<FunctionSource>(n, std::move(value), std::move(derivative)),
                      0.0, std::nullopt);
}

Vec TangentCurve::value(double t, double hint) const {
  Vec v = src_->value(t + offset_, hint + offset_);
  return map_ ? Vec(*map_ * v) : v;
}

Vec TangentCurve::derivative(double t, double hint) const {
  Vec v = src_->derivative(t + offset_, hint + offset_);
  return map_ ? Vec(*map_ * v) : v;
}

std::vector<double> TangentCurve::breaks() const {
  std::vector<double> b{0.0};
  for (double k : src_->kinks()) {
    const double s = k - offset_;
    if (s > 0.0 && s < horizon_) b.push_back(s);
  }
  if (horizon_ > 0.0) b.push_back(horizon_);
  if (b.size() == 1) b.push_back(0.0);
  return b;
}

TangentCurve TangentCurve::tail(double t0) const {
  if (!(t0 >= 0.0 && t0 <= horizon_)) throw InvalidArgument("tail start outside the curve's interval");
  return TangentCurve(base_, horizon_ - t0, src_, offset_ + t0, map_);
}

TangentCurve TangentCurve::head(double t1) const {
  if (!(t1 >= 0.0 && t1 <= horizon_)) throw InvalidArgument("head end outside the curve's interval");
  return TangentCurve(base_, t1, src_, offset_, map_);
}

TangentCurve TangentCurve::mapped(const Mat& map, ChartPoint new_base) const {
  if (map.cols() != dim()) throw InvalidArgument("linear map does not match curve dimension");
  Mat combined = map_ ? Mat(map * *map_) : map;
  return TangentCurve(std::move(new_base), horizon_, src_, offset_, std::move(combined));
}

TangentCurve TangentCurve::operator+(const TangentCurve& other) const {
  if (dim() != other.dim()) throw InvalidArgument("summed curves differ in dimension");
  if ((base_ - other.base_).lpNorm<Eigen::Infinity>() > 0.0) throw InvalidArgument("summed curves differ in base point");
  if (horizon_ != other.horizon_) throw InvalidArgument("summed curves differ in horizon");
  return TangentCurve(base_, horizon_, std::make_shared<SumSource>(*this, other), 0.0, std::nullopt);
}

TangentCurve TangentCurve::scaled(double factor) const {
  return mapped(Mat::Identity(dim(), dim()) * factor, base_);
}

ChartPath ChartPath::samples(std::vector<double> times, std::vector<ChartPoint> points) {
  HermiteSpline spline(std::move(times), std::move(points));
  const double a = spline.t_begin();
  const double b = spline.t_end();
  return ChartPath(a, b, std::make_shared<HermitePath>(std::move(spline)));
}

ChartPath ChartPath::expressions(std::vector<expr::Expr> components, double t_begin, double t_end, double u_value) {
  if (components.empty()) throw InvalidArgument("path needs at least one component");
  for (const auto& c : components)
    if (c.n_vars() != 0) throw InvalidArgument("path components must be expressions in t (and u)");
  if (!(t_end > t_begin)) throw InvalidArgument("path interval must be non-empty");
  return ChartPath(t_begin, t_end, std::make_shared<ExpressionPath>(std::move(components), u_value));
}

ChartPath ChartPath::function(double t_begin, double t_end, TangentCurve::Function position,
                              TangentCurve::Function velocity) {
  if (!(t_end > t_begin)) throw InvalidArgument("path interval must be non-empty");
  const int n = static_cast<int>(position(t_begin).size());
  return ChartPath(t_begin, t_end, std::make_shared<FunctionPath>(n, std::move(position), std::move(velocity)));
}

int ChartPath::dim() const { return src_->dim(); }
ChartPoint ChartPath::position(double t) const { return src_->position(t); }
Vec ChartPath::velocity(double t) const { return src_->velocity(t); }

}  // namespace devroll
