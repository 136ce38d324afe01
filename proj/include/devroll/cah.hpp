// devroll - Cartan-Ambrose-Hicks curve transfer
//
// For a curve gamma from p in M, v_gamma(t) = P_t^0(gamma) gamma'(t) is pulled back
// to T_pM, mapped by a linear isometry phi : T_pM -> T_p~M~ and developed in M~.
// The transfer returns the endpoint of that development and
//   tau_gamma = P_0^1(gamma~) o phi o P_1^0(gamma) : T_gamma(1)M -> T_gamma~(1)M~.
// Along a chart path the transport along gamma and the development in M~ are
// integrated as one system so every quantity is evaluated at the same stage points.

#ifndef DEVROLL_CAH_HPP
#define DEVROLL_CAH_HPP

#include <string>
#include <vector>

#include "devroll/core.hpp"
#include "devroll/curve.hpp"
#include "devroll/manifold.hpp"
#include "devroll/ode.hpp"
#include "devroll/parallel.hpp"
#include "devroll/transport.hpp"

namespace devroll {

inline constexpr double kIsometryTolerance = 1e-10;

// Linear map between tangent spaces in coordinate components.
struct LinearIsometry {
  Mat matrix;
  ChartPoint source;
  ChartPoint target;

  // max |A^T g~(target) A - g(source)|
  double residual(const ChartManifold& m, const ChartManifold& mt) const;
};

// Checked construction; throws InvalidArgument when the residual exceeds tol.
LinearIsometry make_isometry(const ChartManifold& m, const ChartManifold& mt, Mat matrix, ChartPoint source,
                             ChartPoint target, double tol = kIsometryTolerance);

// phi mapping the Gram-Schmidt orthonormal frame at p onto the one at p~, optionally
// composed with an orthogonal matrix Q acting on orthonormal components.
LinearIsometry frame_isometry(const ChartManifold& m, const ChartManifold& mt, const ChartPoint& p,
                              const ChartPoint& pt, const Mat& q);

struct TransferResult {
  ChartPoint endpoint;          // gamma~(1)
  LinearIsometry tau;           // T_gamma(1)M -> T_gamma~(1)M~
  StopReason status = StopReason::completed;
  double t_stop = 0.0;
  double tau_residual = 0.0;    // isometry residual of tau
  DevelopmentResult target;     // gamma~ with frames of M~

  bool completed() const noexcept { return status == StopReason::completed; }
};

// gamma given by a development in M (its frames supply P_t^0).
TransferResult cah_transfer(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                            const DevelopmentResult& gamma, const IntegratorOpts& opts = {});
// gamma given as a chart path.
TransferResult cah_transfer(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                            const ChartPath& gamma, const IntegratorOpts& opts = {});

// Family of chart paths Phi(u, t), (u, t) in [0,1]^2, given as coordinate expressions.
class PathFamily {
 public:
  PathFamily(int n, const std::vector<std::string>& components);
  int dim() const noexcept { return static_cast<int>(comps_.size()); }
  ChartPath at(double u) const;
  ChartPoint position(double u, double t) const;

 private:
  std::vector<expr::Expr> comps_;
};

inline constexpr double kEndpointTolerance = 1e-8;

struct WelldefinedReport {
  double spread = 0.0;            // max_u |endpoint(u) - endpoint(0)|
  double max_tau_residual = 0.0;
  std::vector<double> u;
  std::vector<ChartPoint> endpoints;
  std::vector<StopReason> status;
  bool completed = true;
};

// Transfers the slices u_k = k / (slices - 1). Throws InvalidArgument when some slice
// does not start at phi.source or does not end at the common endpoint within 1e-8.
WelldefinedReport cah_welldefined_check(const ChartManifold& m, const ChartManifold& mt, const LinearIsometry& phi,
                                        const PathFamily& homotopy, int slices = 9, const IntegratorOpts& opts = {},
                                        Exec exec = Exec::parallel);

}  // namespace devroll

#endif  // DEVROLL_CAH_HPP
