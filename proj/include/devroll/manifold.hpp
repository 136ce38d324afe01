// devroll - Riemannian manifolds presented in a single chart
//
// A ChartManifold is an immutable handle on a metric model: the metric tensor and
// its first coordinate derivatives at a chart point, the chart domain and an
// optional boundary level set b(x) (interior b > 0, boundary b = 0). Christoffel
// symbols come from the exact first derivatives; curvature from central
// differences of the Christoffel symbols.

#ifndef DEVROLL_MANIFOLD_HPP
#define DEVROLL_MANIFOLD_HPP

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/expr.hpp"

namespace devroll {

// Chart coordinates x^1..x^n of a point.
using ChartPoint = Vec;

// Tangent vector: components against the coordinate basis at base.
struct Tangent {
  ChartPoint base;
  Vec components;
};

// Metric and its first derivatives: dg[k](i,j) = d g_ij / d x^k.
struct MetricJet {
  Mat g;
  std::vector<Mat> dg;
};

// Gamma^j_{kl}, symmetric in (k,l).
class Christoffel {
 public:
  explicit Christoffel(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

  int dim() const noexcept { return n_; }
  double operator()(int j, int k, int l) const { return data_[index(j, k, l)]; }
  double& operator()(int j, int k, int l) { return data_[index(j, k, l)]; }
  std::span<const double> raw() const noexcept { return data_; }

  // Gamma(X, Y)^j = Gamma^j_{kl} X^k Y^l
  Vec contract(const Vec& x, const Vec& y) const;

 private:
  std::size_t index(int j, int k, int l) const { return static_cast<std::size_t>((j * n_ + k) * n_ + l); }
  int n_;
  std::vector<double> data_;
};

// Fully covariant curvature R_{ijkl} = R(d_i, d_j, d_k, d_l) with the convention
// R(X, Y, Z, W) = <R(Z, W) X, Y> and R(Z, W) = [nabla_Z, nabla_W] - nabla_[Z,W].
class CurvatureTensor {
 public:
  explicit CurvatureTensor(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  int dim() const noexcept { return n_; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }

  // R(X, Y, Z, W) for coordinate-component vectors.
  double apply(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const;

  // Components against an arbitrary frame: rows of frame are the frame vectors.
  CurvatureTensor in_frame(const Mat& frame) const;

  // Sectional curvature of span{X, Y} under metric g.
  double sectional(const Mat& g, const Vec& x, const Vec& y) const;

  double max_abs() const;
  double antisymmetry_residual() const;   // max |R_ijkl + R_jikl|, |R_ijkl + R_ijlk|
  double pair_symmetry_residual() const;  // max |R_ijkl - R_klij|
  double bianchi_residual() const;        // max |R_ijkl + R_jkil + R_kijl|

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }
  int n_;
  std::vector<double> data_;
};

enum class Location { interior, boundary, outside };

const char* to_string(Location loc);

// Backend supplying the metric of one chart.
class ChartModel {
 public:
  virtual ~ChartModel() = default;
  virtual int dim() const = 0;
  virtual Mat metric(const Vec& x) const = 0;
  virtual MetricJet jet(const Vec& x) const = 0;
  virtual bool in_domain(const Vec& x) const {
    (void)x;
    return true;
  }
  virtual bool has_boundary() const { return false; }
  // Signed boundary function; positive in the interior.
  virtual double boundary(const Vec& x) const {
    (void)x;
    return std::numeric_limits<double>::infinity();
  }
};

inline constexpr double kBoundaryTolerance = 1e-10;
inline constexpr double kCurvatureStep = 1e-5;

class ChartManifold {
 public:
  ChartManifold(std::string name, std::shared_ptr<const ChartModel> model, std::vector<double> periods = {},
                std::vector<int> factor_dims = {});

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const ChartModel& model() const noexcept { return *model_; }

  // Metric at p; throws DomainError outside the chart domain.
  Mat metric_at(const ChartPoint& p) const;
  MetricJet metric_jet(const ChartPoint& p) const;

  // Levi-Civita connection from exact metric derivatives.
  Christoffel christoffel(const ChartPoint& p) const;

  // Central differences of Christoffel symbols with step h * max(1, |x^m|).
  CurvatureTensor curvature_at(const ChartPoint& p, double h = kCurvatureStep) const;

  Location inside(const ChartPoint& p) const;
  bool in_domain(const ChartPoint& p) const;
  bool has_boundary() const { return model_->has_boundary(); }
  double boundary_value(const ChartPoint& p) const { return model_->boundary(p); }

  double inner(const ChartPoint& p, const Vec& x, const Vec& y) const;
  double norm(const ChartPoint& p, const Vec& x) const;

  // Coordinate periods used when reporting distances; 0 means not periodic.
  const std::vector<double>& periods() const noexcept { return periods_; }
  // Chart distance, reduced modulo the periods.
  double chart_distance(const ChartPoint& a, const ChartPoint& b, bool periodic = false) const;

  // Factor dimensions when built by product(); empty otherwise.
  const std::vector<int>& factor_dims() const noexcept { return factor_dims_; }

 private:
  void check_point(const ChartPoint& p) const;

  std::string name_;
  std::shared_ptr<const ChartModel> model_;
  int dim_;
  std::vector<double> periods_;
  std::vector<int> factor_dims_;
};

// Riemannian product with block-diagonal metric. Throws InvalidArgument when both
// factors have boundary (the product would have corners).
ChartManifold product(const ChartManifold& a, const ChartManifold& b);

namespace catalog {

ChartManifold euclidean(int n);
// Stereographic chart of the round sphere: g = 4 R^4 / (R^2 + |x|^2)^2 * identity.
ChartManifold sphere_stereo(double radius = 1.0, int n = 2);
// Upper half plane {x1 > 0}, g = identity / x1^2.
ChartManifold hyperbolic_halfplane();
ChartManifold flat_torus(int n);
// [0, L] with the flat metric.
ChartManifold slab(double length);
// [0,1] x R^2/Z^2, flat. Carries the parallel distributions of slab_torus_distributions().
ChartManifold slab_torus(double r);

// Metric entries and domain given as expressions in x0..x{n-1}. boundary may be empty.
ChartManifold from_expressions(int n, const std::vector<std::vector<std::string>>& g, const std::string& domain,
                               const std::string& boundary = {}, std::string name = "expr");

}  // namespace catalog

// Cholesky test.
bool is_positive_definite(const Mat& m);

}  // namespace devroll

#endif  // DEVROLL_MANIFOLD_HPP
