#include "devroll/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace devroll {

Vec Christoffel::contract(const Vec& x, const Vec& y) const {
  Vec out = Vec::Zero(n_);
  for (int j = 0; j < n_; ++j) {
    double s = 0.0;
    for (int k = 0; k < n_; ++k) {
      if (x[k] == 0.0) continue;
      for (int l = 0; l < n_; ++l) s += (*this)(j, k, l) * x[k] * y[l];
    }
    out[j] = s;
  }
  return out;
}

double CurvatureTensor::apply(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      if (y[j] == 0.0) continue;
      for (int k = 0; k < n_; ++k) {
        if (z[k] == 0.0) continue;
        for (int l = 0; l < n_; ++l) s += (*this)(i, j, k, l) * x[i] * y[j] * z[k] * w[l];
      }
    }
  }
  return s;
}

CurvatureTensor CurvatureTensor::in_frame(const Mat& frame) const {
  // Contract one index at a time: O(n^5).
  const int n = n_;
  CurvatureTensor a(n), b(n);
  auto contract_slot = [n, &frame](const CurvatureTensor& src, CurvatureTensor& dst, int slot) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            int idx[4] = {i, j, k, l};
            const int f = idx[slot];
            double s = 0.0;
            for (int m = 0; m < n; ++m) {
              idx[slot] = m;
              s += frame(f, m) * src(idx[0], idx[1], idx[2], idx[3]);
            }
            dst(i, j, k, l) = s;
          }
  };
  contract_slot(*this, a, 0);
  contract_slot(a, b, 1);
  contract_slot(b, a, 2);
  contract_slot(a, b, 3);
  return b;
}

double CurvatureTensor::sectional(const Mat& g, const Vec& x, const Vec& y) const {
  const double xx = x.dot(g * x);
  const double yy = y.dot(g * y);
  const double xy = x.dot(g * y);
  const double area2 = xx * yy - xy * xy;
  if (area2 <= 0.0) throw InvalidArgument("sectional curvature of a degenerate plane");
  // <R(X,Y)Y, X> = R(Y, X, X, Y)
  return apply(y, x, x, y) / area2;
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double CurvatureTensor::antisymmetry_residual() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          m = std::max(m, std::abs((*this)(i, j, k, l) + (*this)(j, i, k, l)));
          m = std::max(m, std::abs((*this)(i, j, k, l) + (*this)(i, j, l, k)));
        }
  return m;
}

double CurvatureTensor::pair_symmetry_residual() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) m = std::max(m, std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)));
  return m;
}

double CurvatureTensor::bianchi_residual() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          m = std::max(m, std::abs((*this)(i, j, k, l) + (*this)(j, k, i, l) + (*this)(k, i, j, l)));
  return m;
}

const char* to_string(Location loc) {
  switch (loc) {
    case Location::interior: return "interior";
    case Location::boundary: return "boundary";
    case Location::outside: return "outside";
  }
  return "?";
}

bool is_positive_definite(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

ChartManifold::ChartManifold(std::string name, std::shared_ptr<const ChartModel> model, std::vector<double> periods,
                             std::vector<int> factor_dims)
    : name_(std::move(name)), model_(std::move(model)), dim_(model_->dim()), periods_(std::move(periods)),
      factor_dims_(std::move(factor_dims)) {
  if (dim_ < 1) throw InvalidArgument("manifold dimension must be at least 1");
  if (periods_.empty()) periods_.assign(static_cast<std::size_t>(dim_), 0.0);
  if (periods_.size() != static_cast<std::size_t>(dim_)) throw InvalidArgument("periods size mismatch");
}

void ChartManifold::check_point(const ChartPoint& p) const {
  if (p.size() != dim_)
    throw InvalidArgument("point has " + std::to_string(p.size()) + " coordinates, manifold '" + name_ +
                          "' has dimension " + std::to_string(dim_));
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(p[i])) throw DomainError("non-finite chart coordinate");
  if (!model_->in_domain(p)) throw DomainError("point outside the chart domain of '" + name_ + "'");
}

bool ChartManifold::in_domain(const ChartPoint& p) const {
  if (p.size() != dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(p[i])) return false;
  return model_->in_domain(p);
}

Mat ChartManifold::metric_at(const ChartPoint& p) const {
  check_point(p);
  return model_->metric(p);
}

MetricJet ChartManifold::metric_jet(const ChartPoint& p) const {
  check_point(p);
  return model_->jet(p);
}

Christoffel ChartManifold::christoffel(const ChartPoint& p) const {
  const MetricJet jet = metric_jet(p);
  const int n = dim_;
  Eigen::LLT<Mat> llt(jet.g);
  if (llt.info() != Eigen::Success) throw NumericalError("metric not positive definite at point");
  const Mat ginv = llt.solve(Mat::Identity(n, n));
  // First kind: [kl, m] = (d_k g_ml + d_l g_mk - d_m g_kl) / 2
  std::vector<double> first(static_cast<std::size_t>(n * n * n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        const double v = 0.5 * (jet.dg[k](m, l) + jet.dg[l](m, k) - jet.dg[m](k, l));
        first[static_cast<std::size_t>((m * n + k) * n + l)] = v;
        first[static_cast<std::size_t>((m * n + l) * n + k)] = v;
      }
  Christoffel gamma(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += ginv(j, m) * first[static_cast<std::size_t>((m * n + k) * n + l)];
        gamma(j, k, l) = s;
        gamma(j, l, k) = s;
      }
  return gamma;
}

CurvatureTensor ChartManifold::curvature_at(const ChartPoint& p, double h) const {
  const int n = dim_;
  const Christoffel g0 = christoffel(p);
  // dgamma[m] = d_m Gamma
  std::vector<Christoffel> dgamma;
  dgamma.reserve(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const double step = h * std::max(1.0, std::abs(p[m]));
    Vec xp = p, xm = p;
    xp[m] += step;
    xm[m] -= step;
    const Christoffel gp = christoffel(xp);
    const Christoffel gm = christoffel(xm);
    Christoffel d(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) d(j, k, l) = (gp(j, k, l) - gm(j, k, l)) / (xp[m] - xm[m]);
    dgamma.push_back(std::move(d));
  }
  // R(d_k, d_l) d_b = Rup(a, b, k, l) d_a
  std::vector<double> rup(static_cast<std::size_t>(n * n * n * n));
  auto up = [n, &rup](int a, int b, int k, int l) -> double& {
    return rup[static_cast<std::size_t>(((a * n + b) * n + k) * n + l)];
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = dgamma[k](a, l, b) - dgamma[l](a, k, b);
          for (int m = 0; m < n; ++m) s += g0(a, k, m) * g0(m, l, b) - g0(a, l, m) * g0(m, k, b);
          up(a, b, k, l) = s;
        }
  const Mat g = metric_at(p);
  CurvatureTensor r(n);
  // R_ijkl = <R(d_k, d_l) d_i, d_j> = g_ja Rup(a, i, k, l)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int a = 0; a < n; ++a) s += g(j, a) * up(a, i, k, l);
          r(i, j, k, l) = s;
        }
  return r;
}

Location ChartManifold::inside(const ChartPoint& p) const {
  if (!in_domain(p)) return Location::outside;
  if (!model_->has_boundary()) return Location::interior;
  const double b = model_->boundary(p);
  if (std::abs(b) <= kBoundaryTolerance) return Location::boundary;
  return b > 0.0 ? Location::interior : Location::outside;
}

double ChartManifold::inner(const ChartPoint& p, const Vec& x, const Vec& y) const {
  return x.dot(metric_at(p) * y);
}

double ChartManifold::norm(const ChartPoint& p, const Vec& x) const { return std::sqrt(inner(p, x, x)); }

double ChartManifold::chart_distance(const ChartPoint& a, const ChartPoint& b, bool periodic) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = a[i] - b[i];
    const double period = periods_[static_cast<std::size_t>(i)];
    if (periodic && period > 0.0) {
      d = std::remainder(d, period);
    }
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace devroll
