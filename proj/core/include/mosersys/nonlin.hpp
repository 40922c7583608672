#pragma once

// The exponential coupling potential
//   H(x, y) = mu1/2 G(x, x) + beta G(x, y) + mu2/2 G(y, y),
//   G(x, y) = e^{|xy|} - 1 - |xy|,
// its derivatives, the system energy and the pointwise inequality oracles.

#include "mosersys/grid.hpp"

namespace mosersys {

/// Exponent arguments above this value raise OverflowError.
inline constexpr double kOverflowCap = 700.0;
/// Below this argument e^z - 1 - z is summed as a power series.
inline constexpr double kSeriesSwitch = 1e-3;

struct ModelParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 0.0;

  /// Throws DomainError unless mu1, mu2 > 0 and everything is finite.
  void validate() const;
  /// Throws HypothesisError unless lambda1, lambda2 > -Lambda1.
  void require_admissible(double principal_eigenvalue) const;
  double sqrt_mu1mu2() const;
};

/// e^z - 1 for z <= kOverflowCap.
double expm1_capped(double z);
/// e^z - 1 - z for z >= 0, cancellation-free for small z.
double exp_remainder2(double z);

double g_val(double x, double y);
double h_val(const ModelParams& p, double x, double y);

struct PotentialGradient {
  double hx = 0.0;
  double hy = 0.0;
};
PotentialGradient h_grad(const ModelParams& p, double x, double y);

struct PotentialHessian {
  double hxx = 0.0;
  double hxy = 0.0;
  double hyy = 0.0;
};
/// Second derivatives on the closed quadrant x, y >= 0.
PotentialHessian h_hess(const ModelParams& p, double x, double y);

struct FieldPair {
  Field u;
  Field v;
};

/// Quadratic part int(|grad u|^2 + lambda u^2).
double quadratic_part(const Grid& grid, const Field& u, double lambda);

/// I(u, v) = 1/2 int(|grad u|^2 + |grad v|^2 + lambda1 u^2 + lambda2 v^2) - int H(u, v).
double energy(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

/// Strong-form residual (-Delta u + lambda1 u - H_u, -Delta v + lambda2 v - H_v);
/// its discrete L^2 pairing with (phi, psi) is the directional derivative of energy().
FieldPair energy_grad(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

/// J_{lambda,mu}(u) = 1/2 int(|grad u|^2 + lambda u^2) - mu/2 int(e^{u^2} - 1 - u^2).
double scalar_energy(const Grid& grid, double lambda, double mu, const Field& u);
/// -Delta u + lambda u - mu u (e^{u^2} - 1)
Field scalar_energy_grad(const Grid& grid, double lambda, double mu, const Field& u);
/// int u^2 (e^{t u^2} - 1)
double nehari_nonlinear(const Grid& grid, const Field& u, double t = 1.0);

struct ExponentialBounds {
  bool product_bound = false;    ///< (e^{xy}-1)^2 <= (e^{x^2}-1)(e^{y^2}-1)
  bool remainder_bound = false;  ///< same with e^z - 1 - z
  bool secant_bound = false;     ///< 0 <= 2(e^z-1-z) <= z(e^z-1) at z = x and z = y
};
/// Inputs x, y >= 0; each comparison carries 1e-12 relative slack.
ExponentialBounds check_exponential_bounds(double x, double y);

/// x H_x + y H_y >= 4 H for x, y >= 0 and beta > 0 (1e-12 relative slack).
bool check_euler_bound(const ModelParams& p, double x, double y);

/// K_p(u, v) for p in [2, 4]: the non-quadratic remainder of I - (1/p)<I'(u,v),(u,v)>.
double k_p(const Grid& grid, const ModelParams& p, const Field& u, const Field& v, double pexp);

}  // namespace mosersys
