#include "devroll/distribution.hpp"

#include <algorithm>
#include <cmath>

#include "devroll/transport.hpp"

namespace devroll {

namespace {

void check_rank(int n, int rank) {
  if (n < 1) throw InvalidArgument("distribution dimension must be positive");
  if (rank < 0 || rank > n) throw InvalidArgument("distribution rank must lie in [0, n]");
}

}  // namespace

Distribution Distribution::expressions(int n, const std::vector<std::vector<std::string>>& entries, int rank,
                                       std::string name) {
  check_rank(n, rank);
  if (static_cast<int>(entries.size()) != n) throw InvalidArgument("projector needs n rows");
  auto exprs = std::make_shared<std::vector<expr::Expr>>();
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != n) throw InvalidArgument("projector needs n columns");
    for (const auto& s : row) exprs->push_back(expr::Expr::parse(s, n));
  }
  return Distribution(
      n, rank,
      [exprs, n](const ChartPoint& x) {
        Mat p(n, n);
        const std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) p(i, j) = (*exprs)[static_cast<std::size_t>(i * n + j)].eval(pt, 0.0);
        return p;
      },
      std::move(name));
}

Distribution Distribution::constant(Mat projector, int rank, std::string name) {
  if (projector.rows() != projector.cols()) throw InvalidArgument("projector must be square");
  const int n = static_cast<int>(projector.rows());
  check_rank(n, rank);
  return Distribution(n, rank, [projector](const ChartPoint&) { return projector; }, std::move(name));
}

Distribution Distribution::span(const ChartManifold& m, std::vector<Vec> vectors, std::string name) {
  const int n = m.dim();
  if (vectors.empty()) throw InvalidArgument("span needs at least one vector");
  Mat v(n, static_cast<int>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != n) throw InvalidArgument("span vector has the wrong dimension");
    v.col(static_cast<int>(i)) = vectors[i];
  }
  Eigen::FullPivLU<Mat> lu(v);
  if (lu.rank() != v.cols()) throw InvalidArgument("span vectors are linearly dependent");
  const int rank = static_cast<int>(v.cols());
  check_rank(n, rank);
  return Distribution(
      n, rank,
      [m, v](const ChartPoint& x) {
        const Mat g = m.metric_at(x);
        const Mat gram = v.transpose() * g * v;
        return Mat(v * gram.llt().solve(v.transpose() * g));
      },
      std::move(name));
}

Distribution Distribution::field(int n, int rank, Field projector, std::string name) {
  check_rank(n, rank);
  return Distribution(n, rank, std::move(projector), std::move(name));
}

Mat Distribution::projector(const ChartPoint& x) const {
  if (x.size() != n_) throw InvalidArgument("point dimension does not match the distribution");
  Mat p = field_(x);
  if (p.rows() != n_ || p.cols() != n_) throw InvalidArgument("projector field returned the wrong shape");
  return p;
}

Distribution Distribution::complement() const {
  const int n = n_;
  auto f = field_;
  return Distribution(
      n_, n_ - rank_, [f, n](const ChartPoint& x) { return Mat(Mat::Identity(n, n) - f(x)); }, name_ + "^perp");
}

Mat Distribution::basis(const ChartManifold& m, const ChartPoint& x) const {
  const Mat p = projector(x);
  const Mat g = m.metric_at(x);
  Mat cand = p;  // columns P e_i
  Mat out(n_, rank_);
  for (int k = 0; k < rank_; ++k) {
    int best = -1;
    double best_norm = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double nj = std::sqrt(std::max(0.0, cand.col(j).dot(g * cand.col(j))));
      if (nj > best_norm) {
        best_norm = nj;
        best = j;
      }
    }
    if (best < 0 || best_norm < 1e-8) throw NumericalError("projector rank is lower than declared");
    const Vec e = cand.col(best) / best_norm;
    out.col(k) = e;
    for (int j = 0; j < n_; ++j) cand.col(j) -= e.dot(g * cand.col(j)) * e;
  }
  return out;
}

ProjectorResidual Distribution::check(const ChartManifold& m, const ChartPoint& x) const {
  const Mat p = projector(x);
  const Mat gp = m.metric_at(x) * p;
  ProjectorResidual r;
  r.idempotence = (p * p - p).cwiseAbs().maxCoeff();
  r.symmetry = (gp - gp.transpose()).cwiseAbs().maxCoeff();
  r.trace = std::abs(p.trace() - rank_);
  return r;
}

std::pair<Distribution, Distribution> factor_distributions(const ChartManifold& product) {
  const auto& dims = product.factor_dims();
  if (dims.size() != 2) throw InvalidArgument("manifold is not a two-factor product");
  const int n = product.dim();
  Mat p1 = Mat::Zero(n, n);
  p1.topLeftCorner(dims[0], dims[0]).setIdentity();
  const Mat p2 = Mat::Identity(n, n) - p1;
  return {Distribution::constant(p1, dims[0], "factor1"), Distribution::constant(p2, dims[1], "factor2")};
}

std::pair<Distribution, Distribution> slab_torus_distributions(double r) {
  if (!std::isfinite(r)) throw InvalidArgument("slope must be finite");
  Vec w(3);
  w << 0.0, -r, 1.0;
  const Mat p2 = w * w.transpose() / w.squaredNorm();
  const Mat p1 = Mat::Identity(3, 3) - p2;
  return {Distribution::constant(p1, 2, "T1"), Distribution::constant(p2, 1, "T2")};
}

std::pair<Tangent, Tangent> split_tangent(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                          const Tangent& w) {
  const int n = m.dim();
  if (d1.dim() != n || d2.dim() != n || w.components.size() != n || w.base.size() != n)
    throw InvalidArgument("split_tangent: dimension mismatch");
  const Mat p1 = d1.projector(w.base);
  const Mat p2 = d2.projector(w.base);
  if ((p1 + p2 - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > kProjectorTolerance)
    throw InvalidArgument("distributions are not complementary at the base point");
  return {Tangent{w.base, p1 * w.components}, Tangent{w.base, p2 * w.components}};
}

ParallelReport check_parallel(const ChartManifold& m, const Distribution& d, const ChartPath& path,
                              const IntegratorOpts& opts) {
  if (d.dim() != m.dim()) throw InvalidArgument("distribution dimension does not match the manifold");
  const DevelopmentResult r = transport_along(m, path, opts);
  const Mat basis = d.basis(m, path.position(path.t_begin()));
  const Mat eye = Mat::Identity(m.dim(), m.dim());
  ParallelReport out;
  out.status = r.status;
  for (const auto& s : r.samples) {
    const Mat moved = s.frame.transpose() * basis;
    const Mat off = (eye - d.projector(s.x)) * moved;
    const Mat g = m.metric_at(s.x);
    for (int k = 0; k < off.cols(); ++k)
      out.residual = std::max(out.residual, std::sqrt(std::max(0.0, off.col(k).dot(g * off.col(k)))));
  }
  return out;
}

double membership_residual(const ChartManifold& m, const Distribution& d, const TangentCurve& v) {
  const int n = m.dim();
  const Mat q = Mat::Identity(n, n) - d.projector(v.base());
  std::vector<double> probes = v.breaks();
  constexpr int kProbes = 64;
  for (int k = 0; k <= kProbes; ++k) probes.push_back(v.horizon() * k / kProbes);
  double worst = 0.0;
  for (double s : probes) {
    const Vec val = v.value(s);
    worst = std::max(worst, (q * val).norm() / (1.0 + val.norm()));
  }
  return worst;
}

}  // namespace devroll
