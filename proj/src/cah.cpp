#include "devroll/cah.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "devroll/variation.hpp"

namespace devroll {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double condition_of(const Mat& f) {
  Eigen::JacobiSVD<Mat> svd(f);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

// State: [F (n*n) | x~ (n) | F~ (n*n)], F transported along gamma in M, (x~, F~)
// the development of A F^-T gamma' in M~.
class TransferSystem : public OdeSystem {
 public:
  TransferSystem(const ChartManifold& m, const ChartManifold& mt, const Mat& a, const ChartPath& path)
      : m_(m), mt_(mt), a_(a), path_(path), n_(m.dim()) {}

  int size() const override { return n_ + 2 * n_ * n_; }

  Vec pulled_velocity(double t, const Vec& y) const {
    const Eigen::Map<const RowMajorMat> f(y.data(), n_, n_);
    return a_ * f.transpose().partialPivLu().solve(path_.velocity(t));
  }

  void rhs(double t, double, const Vec& y, Vec& dy) const override {
    const Vec xdot = path_.velocity(t);
    transport_rhs(m_.christoffel(path_.position(t)), xdot, y.data(), dy.data(), n_);
    const Vec xt = y.segment(n_ * n_, n_);
    development_rhs(mt_.christoffel(xt), pulled_velocity(t, y), y.data() + n_ * n_, dy.data() + n_ * n_, n_);
  }

  double boundary(const Vec& y) const override {
    if (!mt_.has_boundary()) return std::numeric_limits<double>::infinity();
    return mt_.boundary_value(y.segment(n_ * n_, n_));
  }

  bool in_chart(const Vec& y) const override { return mt_.in_domain(y.segment(n_ * n_, n_)); }

  double condition(const Vec& y) const override {
    return std::max(condition_of(Eigen::Map<const RowMajorMat>(y.data(), n_, n_)),
                    condition_of(Eigen::Map<const RowMajorMat>(y.data() + n_ * n_ + n_, n_, n_)));
  }

 private:
  const ChartManifold& m_;
  const ChartManifold& mt_;
  const Mat& a_;
  const ChartPath& path_;
  int n_;
};

void check_phi(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi) {
  if (m.dim() != mt.dim()) throw InvalidArgument("source and target manifolds differ in dimension");
  const int n = m.dim();
  if (phi.matrix.rows() != n || phi.matrix.cols() != n || phi.source.size() != n || phi.target.size() != n)
    throw InvalidArgument("isometry has the wrong shape");
}

TransferResult finish(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                      DevelopmentResult target, const Mat& frame_end, const ChartPoint& source_end) {
  TransferResult out;
  out.status = target.status;
  out.t_stop = target.t_stop;
  out.endpoint = target.back().x;
  // tau = F~^T A F^-T
  out.tau.matrix = target.back().frame.transpose() * phi.matrix *
                   frame_end.transpose().partialPivLu().solve(Mat::Identity(m.dim(), m.dim()));
  out.tau.source = source_end;
  out.tau.target = out.endpoint;
  out.tau_residual = out.tau.residual(m, mt);
  out.target = std::move(target);
  return out;
}

}  // namespace

double LinearIsometry::residual(const ChartManifold& m, const ChartManifold& mt) const {
  return (matrix.transpose() * mt.metric_at(target) * matrix - m.metric_at(source)).cwiseAbs().maxCoeff();
}

LinearIsometry make_isometry(const ChartManifold& m, const ChartManifold& mt, Mat matrix, ChartPoint source,
                             ChartPoint target, double tol) {
  LinearIsometry phi{std::move(matrix), std::move(source), std::move(target)};
  check_phi(m, mt, phi);
  const double r = phi.residual(m, mt);
  if (!(r <= tol)) throw InvalidArgument("map is not a linear isometry (residual " + std::to_string(r) + ")");
  return phi;
}

LinearIsometry frame_isometry(const ChartManifold& m, const ChartManifold& mt, const ChartPoint& p,
                              const ChartPoint& pt, const Mat& q) {
  const int n = m.dim();
  if (q.rows() != n || q.cols() != n) throw InvalidArgument("orthogonal factor has the wrong shape");
  if ((q.transpose() * q - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > kIsometryTolerance)
    throw InvalidArgument("orthogonal factor is not orthogonal");
  const Mat b = orthonormal_basis(m, p);
  const Mat bt = orthonormal_basis(mt, pt);
  // X = B^T c  ->  B~^T Q c
  const Mat a = bt.transpose() * q * b.transpose().partialPivLu().solve(Mat::Identity(n, n));
  return make_isometry(m, mt, a, p, pt, 1e-9);
}

TransferResult cah_transfer(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                            const DevelopmentResult& gamma, const IntegratorOpts& opts) {
  check_phi(m, mt, phi);
  if (gamma.samples.size() < 2) throw InvalidArgument("curve needs at least two samples");
  if (m.chart_distance(gamma.front().x, phi.source) > kEndpointTolerance)
    throw InvalidArgument("curve does not start at the isometry's source point");
  // P_t^0 = F_0^T F_t^-T for frames stored against the development's own base.
  std::vector<double> times;
  std::vector<Vec> pulled;
  const Mat f0t = gamma.front().frame.transpose();
  for (const auto& s : gamma.samples) {
    if (!times.empty() && !(s.t - gamma.front().t > times.back())) continue;
    times.push_back(s.t - gamma.front().t);
    pulled.push_back(f0t * s.frame.transpose().partialPivLu().solve(s.velocity));
  }
  const TangentCurve vt = TangentCurve::hermite(phi.target, times, pulled).mapped(phi.matrix, phi.target);
  DevelopmentResult target = develop(mt, vt, opts);
  const Mat rel_end = gamma.front().frame.partialPivLu().solve(gamma.back().frame);  // F_0^-1 F_1
  return finish(m, mt, phi, std::move(target), rel_end, gamma.back().x);
}

TransferResult cah_transfer(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                            const ChartPath& gamma, const IntegratorOpts& opts) {
  check_phi(m, mt, phi);
  if (gamma.dim() != m.dim()) throw InvalidArgument("path dimension does not match the manifold");
  const int n = m.dim();
  if (m.chart_distance(gamma.position(gamma.t_begin()), phi.source) > kEndpointTolerance)
    throw InvalidArgument("path does not start at the isometry's source point");
  if (mt.inside(phi.target) != Location::interior) throw InvalidArgument("target point must be interior");

  TransferSystem sys(m, mt, phi.matrix, gamma);
  Vec y0 = Vec::Zero(sys.size());
  Eigen::Map<RowMajorMat>(y0.data(), n, n) = Mat::Identity(n, n);
  y0.segment(n * n, n) = phi.target;
  Eigen::Map<RowMajorMat>(y0.data() + n * n + n, n, n) = Mat::Identity(n, n);
  const std::vector<double> breaks{gamma.t_begin(), gamma.t_end()};
  const OdeTrajectory traj = integrate(sys, y0, breaks, opts);

  DevelopmentResult target;
  target.status = traj.reason;
  target.t_stop = traj.t_stop;
  target.steps = traj.steps;
  target.max_condition = traj.max_condition;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const Vec& y = traj.y[k];
    DevelopmentSample s;
    s.t = traj.t[k];
    s.x = y.segment(n * n, n);
    s.frame = Eigen::Map<const RowMajorMat>(y.data() + n * n + n, n, n);
    s.velocity = s.frame.transpose() * sys.pulled_velocity(s.t, y);
    target.samples.push_back(std::move(s));
  }
  target.max_gram_drift = gram_drift(mt, target);
  const Vec& y_end = traj.y.back();
  const Mat frame_end = Eigen::Map<const RowMajorMat>(y_end.data(), n, n);
  return finish(m, mt, phi, std::move(target), frame_end, gamma.position(traj.t.back()));
}

PathFamily::PathFamily(int n, const std::vector<std::string>& components) {
  if (static_cast<int>(components.size()) != n)
    throw InvalidArgument("path family needs " + std::to_string(n) + " components");
  for (const auto& c : components) comps_.push_back(expr::Expr::parse(c, 0, true));
}

ChartPath PathFamily::at(double u) const { return ChartPath::expressions(comps_, 0.0, 1.0, u); }

ChartPoint PathFamily::position(double u, double t) const {
  ChartPoint x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = comps_[static_cast<std::size_t>(i)].eval({}, t, u);
  return x;
}

WelldefinedReport cah_welldefined_check(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                                        const PathFamily& homotopy, int slices, const IntegratorOpts& opts,
                                        Exec exec) {
  check_phi(m, mt, phi);
  if (homotopy.dim() != m.dim()) throw InvalidArgument("homotopy dimension does not match the manifold");
  if (slices < 2) throw InvalidArgument("need at least two slices");
  const auto count = static_cast<std::size_t>(slices);
  WelldefinedReport rep;
  const ChartPoint end0 = homotopy.position(0.0, 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(count - 1);
    if (m.chart_distance(homotopy.position(u, 0.0), phi.source) > kEndpointTolerance)
      throw InvalidArgument("homotopy slice does not start at the source point");
    if (m.chart_distance(homotopy.position(u, 1.0), end0) > kEndpointTolerance)
      throw InvalidArgument("homotopy slices do not share their endpoint");
    rep.u.push_back(u);
  }
  std::vector<TransferResult> results(count);
  for_each_index(count, exec, [&](std::size_t k) {
    const ChartPath path = homotopy.at(rep.u[k]);
    results[k] = cah_transfer(m, mt, phi, path, opts);
  });
  for (const auto& r : results) {
    rep.endpoints.push_back(r.endpoint);
    rep.status.push_back(r.status);
    rep.completed = rep.completed && r.completed();
    rep.max_tau_residual = std::max(rep.max_tau_residual, r.tau_residual);
    rep.spread = std::max(rep.spread, mt.chart_distance(r.endpoint, results.front().endpoint));
  }
  return rep;
}

}  // namespace devroll
