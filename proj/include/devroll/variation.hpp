// devroll - variation fields of families of developments
//
// For a family v(u, t) = sum_i v_i(u, t) e_i of curves in T_pM, with e_i a
// g-orthonormal basis, let Phi(u, t) = dev(p, v(u, .))(t) and E_i(u, t) the
// parallel extension of e_i along Phi(u, .). Writing dPhi/du = U_i E_i and
// nabla_{d/du} E_i = X_ij E_j, the coefficients obey the linear system
//
//   U_i''  = v_k v_l R(E_k, E_i, E_l, E_j) U_j + d_u d_t v_i + d_t v_j X_ji
//   X_ij'  = v_l R(E_i, E_j, E_l, E_k) U_k
//   U(0) = 0,  U'(0) = d_u v(u, 0),  X(0) = 0
//
// which reduces to the Jacobi equation when v is constant in t.

#ifndef DEVROLL_VARIATION_HPP
#define DEVROLL_VARIATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/expr.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"
#include "devroll/transport.hpp"

namespace devroll {

inline constexpr double kMixedDerivativeStep = 1e-5;

class VariationFamily {
 public:
  // components: v_i(u, t) as expressions in u and t. basis rows are e_i in
  // coordinates; when absent the Gram-Schmidt basis of the coordinate frame is used.
  VariationFamily(const ChartManifold& m, ChartPoint base, const std::vector<std::string>& components,
                  std::optional<Mat> basis = std::nullopt, double horizon = 1.0);

  const ChartPoint& base() const noexcept { return base_; }
  const Mat& basis() const noexcept { return basis_; }
  double horizon() const noexcept { return horizon_; }
  int dim() const noexcept { return static_cast<int>(base_.size()); }

  // Components against the orthonormal basis.
  Vec v(double u, double t) const;
  Vec dv_dt(double u, double t) const;
  Vec dv_du(double u, double t) const;
  // d_u d_t v by central differences in u of the exact t-derivative.
  Vec d2v_dudt(double u, double t) const;

  // The member curve at fixed u in coordinate components.
  TangentCurve curve(double u) const;

 private:
  ChartPoint base_;
  Mat basis_;
  std::vector<expr::Expr> comps_;
  double horizon_;
};

// g-orthonormal basis of T_pM (rows) by Gram-Schmidt on the coordinate vectors.
Mat orthonormal_basis(const ChartManifold& m, const ChartPoint& p);

struct VariationSample {
  double t = 0.0;
  Vec U;   // dPhi/du against E_i
  Vec dU;  // U'
  Mat X;   // connection coefficients X_ij
};

struct VariationField {
  std::vector<VariationSample> samples;
  StopReason status = StopReason::completed;
  double max_skew = 0.0;  // max |X + X^T|
  DevelopmentResult base; // the development at u0

  bool completed() const noexcept { return status == StopReason::completed; }
};

VariationField solve_variation(const ChartManifold& m, const VariationFamily& family, double u0,
                               const IntegratorOpts& opts = {});

struct FdVariation {
  std::vector<double> t;
  std::vector<Vec> U;
};

// (Phi(u0+du, t) - Phi(u0-du, t)) / (2 du) expressed in the frame E_i(u0, t).
FdVariation variation_fd_oracle(const ChartManifold& m, const VariationFamily& family, double u0, double du,
                                const IntegratorOpts& opts = {});

}  // namespace devroll

#endif  // DEVROLL_VARIATION_HPP
