#include <cmath>
#include <cstdio>

#include "devroll/manifold.hpp"

namespace devroll {

namespace {

std::string format_param(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MetricJet flat_jet(int n) {
  MetricJet j{Mat::Identity(n, n), std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n))};
  return j;
}

class FlatModel : public ChartModel {
 public:
  explicit FlatModel(int n) : n_(n) {}
  int dim() const override { return n_; }
  Mat metric(const Vec&) const override { return Mat::Identity(n_, n_); }
  MetricJet jet(const Vec&) const override { return flat_jet(n_); }

 private:
  int n_;
};

// Flat metric on a chart whose first coordinate ranges over [0, length].
class SlabModel : public ChartModel {
 public:
  SlabModel(int n, double length) : n_(n), length_(length) {}
  int dim() const override { return n_; }
  Mat metric(const Vec&) const override { return Mat::Identity(n_, n_); }
  MetricJet jet(const Vec&) const override { return flat_jet(n_); }
  bool has_boundary() const override { return true; }
  double boundary(const Vec& x) const override { return x[0] * (length_ - x[0]); }

 private:
  int n_;
  double length_;
};

// g = lambda(x) * identity
class SphereStereoModel : public ChartModel {
 public:
  SphereStereoModel(double radius, int n) : r2_(radius * radius), n_(n) {}
  int dim() const override { return n_; }
  Mat metric(const Vec& x) const override {
    const double q = r2_ + x.squaredNorm();
    return Mat::Identity(n_, n_) * (4.0 * r2_ * r2_ / (q * q));
  }
  MetricJet jet(const Vec& x) const override {
    const double q = r2_ + x.squaredNorm();
    MetricJet j;
    j.g = Mat::Identity(n_, n_) * (4.0 * r2_ * r2_ / (q * q));
    j.dg.reserve(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) j.dg.push_back(Mat::Identity(n_, n_) * (-16.0 * r2_ * r2_ * x[k] / (q * q * q)));
    return j;
  }

 private:
  double r2_;
  int n_;
};

class HalfplaneModel : public ChartModel {
 public:
  int dim() const override { return 2; }
  Mat metric(const Vec& x) const override { return Mat::Identity(2, 2) / (x[1] * x[1]); }
  MetricJet jet(const Vec& x) const override {
    const double y = x[1];
    MetricJet j;
    j.g = Mat::Identity(2, 2) / (y * y);
    j.dg = {Mat::Zero(2, 2), Mat::Identity(2, 2) * (-2.0 / (y * y * y))};
    return j;
  }
  bool in_domain(const Vec& x) const override { return x[1] > 0.0; }
};

class ExpressionModel : public ChartModel {
 public:
  ExpressionModel(int n, std::vector<expr::Expr> entries, expr::Predicate domain, expr::Expr boundary)
      : n_(n), entries_(std::move(entries)), domain_(std::move(domain)), boundary_(std::move(boundary)) {}

  int dim() const override { return n_; }

  Mat metric(const Vec& x) const override {
    Mat g(n_, n_);
    const std::span<const double> pt(x.data(), static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const double v = entry(i, j).eval(pt, 0.0);
        g(i, j) = v;
        g(j, i) = v;
      }
    return g;
  }

  MetricJet jet(const Vec& x) const override {
    MetricJet jt;
    jt.g.resize(n_, n_);
    jt.dg.assign(static_cast<std::size_t>(n_), Mat::Zero(n_, n_));
    const std::span<const double> pt(x.data(), static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const expr::DualValue d = entry(i, j).eval_dual(pt, 0.0);
        jt.g(i, j) = jt.g(j, i) = d.value;
        for (int k = 0; k < n_; ++k) {
          jt.dg[static_cast<std::size_t>(k)](i, j) = d.partials[static_cast<std::size_t>(k)];
          jt.dg[static_cast<std::size_t>(k)](j, i) = d.partials[static_cast<std::size_t>(k)];
        }
      }
    return jt;
  }

  bool in_domain(const Vec& x) const override {
    return domain_.holds(std::span<const double>(x.data(), static_cast<std::size_t>(n_)));
  }
  bool has_boundary() const override { return !boundary_.empty(); }
  double boundary(const Vec& x) const override {
    if (boundary_.empty()) return std::numeric_limits<double>::infinity();
    try {
      return boundary_.eval(std::span<const double>(x.data(), static_cast<std::size_t>(n_)), 0.0);
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

 private:
  const expr::Expr& entry(int i, int j) const { return entries_[static_cast<std::size_t>(i * n_ + j)]; }

  int n_;
  std::vector<expr::Expr> entries_;
  expr::Predicate domain_;
  expr::Expr boundary_;
};

class ProductModel : public ChartModel {
 public:
  ProductModel(std::shared_ptr<const ChartModel> a, std::shared_ptr<const ChartModel> b)
      : a_(std::move(a)), b_(std::move(b)), na_(a_->dim()), nb_(b_->dim()) {}

  int dim() const override { return na_ + nb_; }

  Mat metric(const Vec& x) const override {
    Mat g = Mat::Zero(na_ + nb_, na_ + nb_);
    g.topLeftCorner(na_, na_) = a_->metric(x.head(na_));
    g.bottomRightCorner(nb_, nb_) = b_->metric(x.tail(nb_));
    return g;
  }

  MetricJet jet(const Vec& x) const override {
    const int n = na_ + nb_;
    const MetricJet ja = a_->jet(x.head(na_));
    const MetricJet jb = b_->jet(x.tail(nb_));
    MetricJet j;
    j.g = Mat::Zero(n, n);
    j.g.topLeftCorner(na_, na_) = ja.g;
    j.g.bottomRightCorner(nb_, nb_) = jb.g;
    j.dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (int k = 0; k < na_; ++k) j.dg[static_cast<std::size_t>(k)].topLeftCorner(na_, na_) = ja.dg[static_cast<std::size_t>(k)];
    for (int k = 0; k < nb_; ++k)
      j.dg[static_cast<std::size_t>(na_ + k)].bottomRightCorner(nb_, nb_) = jb.dg[static_cast<std::size_t>(k)];
    return j;
  }

  bool in_domain(const Vec& x) const override { return a_->in_domain(x.head(na_)) && b_->in_domain(x.tail(nb_)); }
  bool has_boundary() const override { return a_->has_boundary() || b_->has_boundary(); }
  double boundary(const Vec& x) const override {
    if (a_->has_boundary()) return a_->boundary(x.head(na_));
    return b_->boundary(x.tail(nb_));
  }

 private:
  std::shared_ptr<const ChartModel> a_;
  std::shared_ptr<const ChartModel> b_;
  int na_;
  int nb_;
};

}  // namespace

ChartManifold product(const ChartManifold& a, const ChartManifold& b) {
  if (a.has_boundary() && b.has_boundary())
    throw InvalidArgument("corner product unsupported: both factors have boundary");
  auto ma = std::make_shared<ChartManifold>(a);
  auto mb = std::make_shared<ChartManifold>(b);
  std::shared_ptr<const ChartModel> model = std::make_shared<ProductModel>(
      std::shared_ptr<const ChartModel>(ma, &ma->model()), std::shared_ptr<const ChartModel>(mb, &mb->model()));
  std::vector<double> periods = a.periods();
  periods.insert(periods.end(), b.periods().begin(), b.periods().end());
  return ChartManifold("product(" + a.name() + "," + b.name() + ")", std::move(model), std::move(periods),
                       {a.dim(), b.dim()});
}

namespace catalog {

ChartManifold euclidean(int n) {
  if (n < 1) throw InvalidArgument("euclidean dimension must be at least 1");
  return ChartManifold("euclidean(" + std::to_string(n) + ")", std::make_shared<FlatModel>(n));
}

ChartManifold sphere_stereo(double radius, int n) {
  if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
  if (n < 1) throw InvalidArgument("sphere dimension must be at least 1");
  return ChartManifold("sphere_stereo(" + format_param(radius) + ")", std::make_shared<SphereStereoModel>(radius, n));
}

ChartManifold hyperbolic_halfplane() {
  return ChartManifold("hyperbolic_halfplane", std::make_shared<HalfplaneModel>());
}

ChartManifold flat_torus(int n) {
  if (n < 1) throw InvalidArgument("torus dimension must be at least 1");
  return ChartManifold("flat_torus(" + std::to_string(n) + ")", std::make_shared<FlatModel>(n),
                       std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

ChartManifold slab(double length) {
  if (!(length > 0.0)) throw InvalidArgument("slab length must be positive");
  return ChartManifold("slab(" + format_param(length) + ")", std::make_shared<SlabModel>(1, length));
}

ChartManifold slab_torus(double r) {
  if (!std::isfinite(r)) throw InvalidArgument("slab_torus slope must be finite");
  return ChartManifold("slab_torus(" + format_param(r) + ")", std::make_shared<SlabModel>(3, 1.0),
                       std::vector<double>{0.0, 1.0, 1.0});
}

ChartManifold from_expressions(int n, const std::vector<std::vector<std::string>>& g, const std::string& domain,
                               const std::string& boundary, std::string name) {
  if (n < 1 || n > expr::kMaxCoords)
    throw InvalidArgument("expression metric dimension must be in [1, " + std::to_string(expr::kMaxCoords) + "]");
  if (g.size() != static_cast<std::size_t>(n)) throw InvalidArgument("metric must have " + std::to_string(n) + " rows");
  std::vector<expr::Expr> entries;
  entries.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    if (g[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(n))
      throw InvalidArgument("metric row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) entries.push_back(expr::Expr::parse(g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], n));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!entries[static_cast<std::size_t>(i * n + j)].structurally_equal(entries[static_cast<std::size_t>(j * n + i)]))
        throw InvalidArgument("metric entries (" + std::to_string(i) + "," + std::to_string(j) + ") and (" +
                              std::to_string(j) + "," + std::to_string(i) + ") differ");
  expr::Predicate dom = expr::Predicate::parse(domain, n);
  expr::Expr b;
  if (!boundary.empty()) b = expr::Expr::parse(boundary, n);
  return ChartManifold(std::move(name), std::make_shared<ExpressionModel>(n, std::move(entries), std::move(dom), std::move(b)));
}

}  // namespace catalog

}  // namespace devroll
