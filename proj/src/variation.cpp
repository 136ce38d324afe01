#include "devroll/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace devroll {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t t_slot = static_cast<std::size_t>(expr::Expr::t_slot(0));
constexpr std::size_t u_slot = static_cast<std::size_t>(expr::Expr::u_slot(0));

// State layout: [x (n) | F (n*n) | U (n) | U' (n) | X (n*n)]
struct Layout {
  int n;
  int x() const { return 0; }
  int f() const { return n; }
  int u() const { return n + n * n; }
  int du() const { return 2 * n + n * n; }
  int xm() const { return 3 * n + n * n; }
  int size() const { return 3 * n + 2 * n * n; }
};

class VariationSystem : public OdeSystem {
 public:
  VariationSystem(const ChartManifold& m, const VariationFamily& fam, double u0)
      : m_(m), fam_(fam), u0_(u0), lay_{m.dim()} {}

  int size() const override { return lay_.size(); }

  void rhs(double t, double, const Vec& y, Vec& dy) const override {
    const int n = lay_.n;
    const Vec x = y.segment(lay_.x(), n);
    const Vec vi = fam_.v(u0_, t);
    const Vec coords = fam_.basis().transpose() * vi;
    const Christoffel gamma = m_.christoffel(x);
    development_rhs(gamma, coords, y.data(), dy.data(), n);

    const Eigen::Map<const RowMajorMat> frame(y.data() + lay_.f(), n, n);
    const Mat e = fam_.basis() * frame;  // rows E_i
    const CurvatureTensor r = m_.curvature_at(x).in_frame(e);
    const Vec dtv = fam_.dv_dt(u0_, t);
    const Vec dudtv = fam_.d2v_dudt(u0_, t);
    const Vec u = y.segment(lay_.u(), n);
    const Eigen::Map<const RowMajorMat> xm(y.data() + lay_.xm(), n, n);

    dy.segment(lay_.u(), n) = y.segment(lay_.du(), n);
    for (int i = 0; i < n; ++i) {
      double s = dudtv[i];
      for (int j = 0; j < n; ++j) {
        double c = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) c += vi[k] * vi[l] * r(k, i, l, j);
        s += c * u[j] + dtv[j] * xm(j, i);
      }
      dy[lay_.du() + i] = s;
    }
    Eigen::Map<RowMajorMat> dxm(dy.data() + lay_.xm(), n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += vi[l] * r(i, j, l, k) * u[k];
        dxm(i, j) = s;
      }
  }

  double boundary(const Vec& y) const override {
    if (!m_.has_boundary()) return std::numeric_limits<double>::infinity();
    return m_.boundary_value(y.head(lay_.n));
  }

  bool in_chart(const Vec& y) const override { return m_.in_domain(y.head(lay_.n)); }

 private:
  const ChartManifold& m_;
  const VariationFamily& fam_;
  double u0_;
  Layout lay_;
};

}  // namespace

Mat orthonormal_basis(const ChartManifold& m, const ChartPoint& p) {
  const Mat g = m.metric_at(p);
  const int n = m.dim();
  Mat basis = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    Vec e = basis.row(i).transpose();
    for (int j = 0; j < i; ++j) {
      const Vec f = basis.row(j).transpose();
      e -= f.dot(g * e) * f;
    }
    const double len = std::sqrt(e.dot(g * e));
    if (!(len > 0.0)) throw NumericalError("degenerate metric in Gram-Schmidt");
    basis.row(i) = (e / len).transpose();
  }
  return basis;
}

VariationFamily::VariationFamily(const ChartManifold& m, ChartPoint base, const std::vector<std::string>& components,
                                 std::optional<Mat> basis, double horizon)
    : base_(std::move(base)), horizon_(horizon) {
  const int n = m.dim();
  if (base_.size() != n) throw InvalidArgument("family base point has the wrong dimension");
  if (static_cast<int>(components.size()) != n)
    throw InvalidArgument("family needs " + std::to_string(n) + " components");
  if (!(horizon_ > 0.0)) throw InvalidArgument("family horizon must be positive");
  for (const auto& c : components) comps_.push_back(expr::Expr::parse(c, 0, true));
  basis_ = basis ? *basis : orthonormal_basis(m, base_);
  if (basis_.rows() != n || basis_.cols() != n) throw InvalidArgument("family basis has the wrong shape");
  const Mat gram = basis_ * m.metric_at(base_) * basis_.transpose();
  if ((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("family basis is not orthonormal at the base point");
}

Vec VariationFamily::v(double u, double t) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = comps_[static_cast<std::size_t>(i)].eval({}, t, u);
  return out;
}

Vec VariationFamily::dv_dt(double u, double t) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = comps_[static_cast<std::size_t>(i)].eval_dual({}, t, u).partials[t_slot];
  return out;
}

Vec VariationFamily::dv_du(double u, double t) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = comps_[static_cast<std::size_t>(i)].eval_dual({}, t, u).partials[u_slot];
  return out;
}

Vec VariationFamily::d2v_dudt(double u, double t) const {
  const double h = kMixedDerivativeStep;
  return (dv_dt(u + h, t) - dv_dt(u - h, t)) / (2.0 * h);
}

TangentCurve VariationFamily::curve(double u) const {
  const Mat bt = basis_.transpose();
  auto self = *this;
  return TangentCurve::function(
      base_, horizon_, [self, bt, u](double t) { return Vec(bt * self.v(u, t)); },
      [self, bt, u](double t) { return Vec(bt * self.dv_dt(u, t)); });
}

VariationField solve_variation(const ChartManifold& m, const VariationFamily& family, double u0,
                               const IntegratorOpts& opts) {
  const int n = m.dim();
  if (family.dim() != n) throw InvalidArgument("family dimension does not match the manifold");
  if (m.inside(family.base()) != Location::interior) throw InvalidArgument("family base point must be interior");
  const Layout lay{n};
  Vec y0 = Vec::Zero(lay.size());
  y0.segment(lay.x(), n) = family.base();
  Eigen::Map<RowMajorMat>(y0.data() + lay.f(), n, n) = Mat::Identity(n, n);
  y0.segment(lay.du(), n) = family.dv_du(u0, 0.0);

  VariationSystem sys(m, family, u0);
  const std::vector<double> breaks{0.0, family.horizon()};
  const OdeTrajectory traj = integrate(sys, y0, breaks, opts);

  VariationField out;
  out.status = traj.reason;
  out.base.status = traj.reason;
  out.base.t_stop = traj.t_stop;
  out.base.steps = traj.steps;
  const Mat bt = family.basis().transpose();
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const Vec& y = traj.y[k];
    VariationSample s;
    s.t = traj.t[k];
    s.U = y.segment(lay.u(), n);
    s.dU = y.segment(lay.du(), n);
    s.X = Eigen::Map<const RowMajorMat>(y.data() + lay.xm(), n, n);
    out.max_skew = std::max(out.max_skew, (s.X + s.X.transpose()).cwiseAbs().maxCoeff());
    out.samples.push_back(std::move(s));

    DevelopmentSample d;
    d.t = traj.t[k];
    d.x = y.segment(lay.x(), n);
    d.frame = Eigen::Map<const RowMajorMat>(y.data() + lay.f(), n, n);
    d.velocity = d.frame.transpose() * (bt * family.v(u0, d.t));
    out.base.samples.push_back(std::move(d));
  }
  out.base.max_gram_drift = gram_drift(m, out.base);
  return out;
}

FdVariation variation_fd_oracle(const ChartManifold& m, const VariationFamily& family, double u0, double du,
                                const IntegratorOpts& opts) {
  if (!(du > 0.0)) throw InvalidArgument("du must be positive");
  const DevelopmentResult plus = develop(m, family.curve(u0 + du), opts);
  const DevelopmentResult minus = develop(m, family.curve(u0 - du), opts);
  const DevelopmentResult mid = develop(m, family.curve(u0), opts);
  for (const auto* r : {&plus, &minus, &mid})
    if (!r->completed()) throw NumericalError(std::string("oracle development stopped: ") + to_string(r->status));
  if (plus.samples.size() != mid.samples.size() || minus.samples.size() != mid.samples.size())
    throw NumericalError("oracle developments produced different sample grids");
  FdVariation out;
  for (std::size_t k = 0; k < mid.samples.size(); ++k) {
    const Vec d = (plus.samples[k].x - minus.samples[k].x) / (2.0 * du);
    const Mat e = family.basis() * mid.samples[k].frame;  // rows E_i
    out.t.push_back(mid.samples[k].t);
    out.U.push_back(e.transpose().partialPivLu().solve(d));
  }
  return out;
}

}  // namespace devroll
