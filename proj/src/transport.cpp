#include "devroll/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace devroll {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat frame_from(const Vec& y, int offset, int n) {
  return Eigen::Map<const RowMajorMat>(y.data() + offset, n, n);
}

double frame_condition(const double* frame, int n) {
  const Eigen::Map<const RowMajorMat> f(frame, n, n);
  Eigen::JacobiSVD<Mat> svd(f);
  const auto& s = svd.singularValues();
  const double smin = s[n - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

class DevelopmentSystem : public OdeSystem {
 public:
  DevelopmentSystem(const ChartManifold& m, const TangentCurve& v) : m_(m), v_(v), n_(m.dim()) {}

  int size() const override { return n_ + n_ * n_; }

  void rhs(double t, double hint, const Vec& y, Vec& dy) const override {
    const Vec x = y.head(n_);
    const Christoffel gamma = m_.christoffel(x);
    development_rhs(gamma, v_.value(t, hint), y.data(), dy.data(), n_);
  }

  double boundary(const Vec& y) const override {
    if (!m_.has_boundary()) return std::numeric_limits<double>::infinity();
    return m_.boundary_value(y.head(n_));
  }

  bool in_chart(const Vec& y) const override { return m_.in_domain(y.head(n_)); }

  double condition(const Vec& y) const override { return frame_condition(y.data() + n_, n_); }

 private:
  const ChartManifold& m_;
  const TangentCurve& v_;
  int n_;
};

class PathTransportSystem : public OdeSystem {
 public:
  PathTransportSystem(const ChartManifold& m, const ChartPath& path) : m_(m), path_(path), n_(m.dim()) {}

  int size() const override { return n_ * n_; }

  void rhs(double t, double, const Vec& y, Vec& dy) const override {
    const Christoffel gamma = m_.christoffel(path_.position(t));
    transport_rhs(gamma, path_.velocity(t), y.data(), dy.data(), n_);
  }

  double condition(const Vec& y) const override { return frame_condition(y.data(), n_); }

 private:
  const ChartManifold& m_;
  const ChartPath& path_;
  int n_;
};

Vec flatten(const ChartPoint& x, const Mat& frame) {
  const int n = static_cast<int>(x.size());
  Vec y(n + n * n);
  y.head(n) = x;
  Eigen::Map<RowMajorMat>(y.data() + n, n, n) = frame;
  return y;
}

void check_curve(const ChartManifold& m, const TangentCurve& v) {
  if (v.dim() != m.dim())
    throw InvalidArgument("curve has dimension " + std::to_string(v.dim()) + ", manifold has " + std::to_string(m.dim()));
  if (m.inside(v.base()) != Location::interior) throw InvalidArgument("development must start at an interior point");
}

}  // namespace

void development_rhs(const Christoffel& gamma, const Vec& v, const double* state, double* dstate, int n) {
  const Eigen::Map<const RowMajorMat> frame(state + n, n, n);
  Eigen::Map<Vec> dx(dstate, n);
  dx.noalias() = frame.transpose() * v;
  const Vec xdot = dx;
  transport_rhs(gamma, xdot, state + n, dstate + n, n);
}

void transport_rhs(const Christoffel& gamma, const Vec& xdot, const double* frame, double* dframe, int n) {
  // Gamma contracted with the velocity: A(j, k) = Gamma^j_{kl} xdot^l
  Mat a = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += gamma(j, k, l) * xdot[l];
      a(j, k) = s;
    }
  const Eigen::Map<const RowMajorMat> f(frame, n, n);
  Eigen::Map<RowMajorMat> df(dframe, n, n);
  df.noalias() = -(f * a.transpose());
}

DevelopmentResult develop(const ChartManifold& m, const TangentCurve& v, const IntegratorOpts& opts) {
  check_curve(m, v);
  const int n = m.dim();
  DevelopmentSystem sys(m, v);
  const std::vector<double> breaks = v.breaks();
  const OdeTrajectory traj = integrate(sys, flatten(v.base(), Mat::Identity(n, n)), breaks, opts);

  DevelopmentResult out;
  out.status = traj.reason;
  out.t_stop = traj.t_stop;
  out.steps = traj.steps;
  out.max_condition = traj.max_condition;
  out.samples.reserve(traj.t.size());
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    DevelopmentSample s;
    s.t = traj.t[k];
    s.x = traj.y[k].head(n);
    s.frame = frame_from(traj.y[k], n, n);
    s.velocity = s.frame.transpose() * v.value(s.t, traj.hint[k]);
    out.samples.push_back(std::move(s));
  }
  // Initial conditions hold exactly.
  out.samples.front().x = v.base();
  out.samples.front().frame = Mat::Identity(n, n);
  out.max_gram_drift = gram_drift(m, out);
  return out;
}

DevelopmentResult geodesic(const ChartManifold& m, const ChartPoint& p, const Vec& v0, double horizon,
                           const IntegratorOpts& opts) {
  return develop(m, TangentCurve::constant(p, v0, horizon), opts);
}

DevelopmentSample state_at(const ChartManifold& m, const DevelopmentResult& result, const TangentCurve& v, double t0,
                           const IntegratorOpts& opts) {
  validate(opts);
  if (result.samples.empty()) throw InvalidArgument("empty development");
  const double t_first = result.front().t;
  const double t_last = result.back().t;
  if (!(t0 >= t_first && t0 <= t_last)) throw InvalidArgument("t0 beyond the computed trajectory");
  const auto it = std::upper_bound(result.samples.begin(), result.samples.end(), t0,
                                   [](double t, const DevelopmentSample& s) { return t < s.t; });
  const DevelopmentSample& from = *(it - 1);
  if (from.t == t0) return from;

  const int n = m.dim();
  DevelopmentSystem sys(m, v);
  const double hint = 0.5 * (from.t + t0);
  // Sub-step so the re-integration never uses a step longer than the configured one.
  const double span = t0 - from.t;
  const auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / opts.step - 1e-9)));
  const double h = span / static_cast<double>(nsteps);
  Vec y = flatten(from.x, from.frame);
  for (std::size_t k = 0; k < nsteps; ++k) y = rk4_step(sys, from.t + static_cast<double>(k) * h, hint, y, h);

  DevelopmentSample s;
  s.t = t0;
  s.x = y.head(n);
  s.frame = frame_from(y, n, n);
  s.velocity = s.frame.transpose() * v.value(t0, hint);
  return s;
}

DevelopmentResult restart(const ChartManifold& m, const DevelopmentResult& result, const TangentCurve& v, double t0,
                          const IntegratorOpts& opts) {
  if (!(t0 >= 0.0 && t0 <= v.horizon())) throw InvalidArgument("t0 outside the curve's interval");
  const DevelopmentSample start = state_at(m, result, v, t0, opts);
  if (t0 == v.horizon()) {
    DevelopmentResult out;
    out.samples.push_back(start);
    out.t_stop = t0;
    return out;
  }
  const TangentCurve tail = v.tail(t0).mapped(start.frame.transpose(), start.x);
  DevelopmentResult out = develop(m, tail, opts);
  for (auto& s : out.samples) {
    s.t += t0;
    s.frame = start.frame * s.frame;
  }
  out.t_stop += t0;
  out.max_gram_drift = gram_drift(m, out);
  return out;
}

DevelopmentResult transport_along(const ChartManifold& m, const ChartPath& path, const IntegratorOpts& opts) {
  if (path.dim() != m.dim()) throw InvalidArgument("path dimension does not match the manifold");
  const int n = m.dim();
  PathTransportSystem sys(m, path);
  Vec y0(n * n);
  Eigen::Map<RowMajorMat>(y0.data(), n, n) = Mat::Identity(n, n);
  const std::vector<double> breaks{path.t_begin(), path.t_end()};
  const OdeTrajectory traj = integrate(sys, y0, breaks, opts);

  DevelopmentResult out;
  out.status = traj.reason;
  out.t_stop = traj.t_stop;
  out.steps = traj.steps;
  out.max_condition = traj.max_condition;
  out.samples.reserve(traj.t.size());
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    DevelopmentSample s;
    s.t = traj.t[k];
    s.x = path.position(s.t);
    s.frame = frame_from(traj.y[k], 0, n);
    s.velocity = path.velocity(s.t);
    out.samples.push_back(std::move(s));
  }
  out.max_gram_drift = gram_drift(m, out);
  return out;
}

Vec parallel_transport(const ChartManifold& m, const ChartPath& path, const Vec& x0, const IntegratorOpts& opts) {
  if (x0.size() != m.dim()) throw InvalidArgument("vector dimension does not match the manifold");
  const DevelopmentResult r = transport_along(m, path, opts);
  if (!r.completed()) throw NumericalError(std::string("parallel transport stopped: ") + to_string(r.status));
  return r.back().frame.transpose() * x0;
}

double gram_drift(const ChartManifold& m, const DevelopmentResult& result) {
  if (result.samples.empty()) return 0.0;
  const auto& s0 = result.front();
  const Mat g0 = s0.frame * m.metric_at(s0.x) * s0.frame.transpose();
  double drift = 0.0;
  for (const auto& s : result.samples) {
    if (!m.in_domain(s.x)) continue;
    const Mat gk = s.frame * m.metric_at(s.x) * s.frame.transpose();
    drift = std::max(drift, (gk - g0).cwiseAbs().maxCoeff());
  }
  return drift;
}

ChartPath path_of(const DevelopmentResult& result) {
  if (result.samples.size() < 2) throw InvalidArgument("a path needs at least two samples");
  std::vector<double> times;
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  for (const auto& s : result.samples) {
    if (!times.empty() && !(s.t > times.back())) continue;
    times.push_back(s.t);
    points.push_back(s.x);
    velocities.push_back(s.velocity);
  }
  auto spline = std::make_shared<HermiteSpline>(std::move(times), std::move(points), std::move(velocities));
  return ChartPath::function(
      spline->t_begin(), spline->t_end(), [spline](double t) { return spline->value(t); },
      [spline](double t) { return spline->derivative(t); });
}

}  // namespace devroll
