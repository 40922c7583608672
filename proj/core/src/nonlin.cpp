#include "mosersys/nonlin.hpp"

#include <cmath>
#include <string>

#include "mosersys/errors.hpp"

namespace mosersys {

void ModelParams::validate() const {
  for (double x : {lambda1, lambda2, mu1, mu2, beta}) {
    if (!std::isfinite(x)) throw DomainError("model parameters must be finite");
  }
  if (mu1 <= 0.0 || mu2 <= 0.0) throw DomainError("mu1 and mu2 must be positive");
}

void ModelParams::require_admissible(double principal_eigenvalue) const {
  validate();
  if (lambda1 <= -principal_eigenvalue || lambda2 <= -principal_eigenvalue) {
    throw HypothesisError("lambda_i must exceed -Lambda1 = " +
                          std::to_string(-principal_eigenvalue));
  }
}

double ModelParams::sqrt_mu1mu2() const { return std::sqrt(mu1 * mu2); }

double expm1_capped(double z) {
  if (!(z <= kOverflowCap)) throw OverflowError("exponent argument exceeds overflow cap", z);
  return std::expm1(z);
}

double exp_remainder2(double z) {
  if (!(z <= kOverflowCap)) throw OverflowError("exponent argument exceeds overflow cap", z);
  if (z < kSeriesSwitch) {
    // Horner form of z^2/2! + ... + z^7/7!; the dropped tail is below 1e-20 relative
    return z * z * (0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720 + z / 5040)))));
  }
  if (z < 1.0) {
    // z is still small enough that expm1(z) and z share leading digits
    const long double zl = z;
    return static_cast<double>(std::expm1l(zl) - zl);
  }
  return std::expm1(z) - z;
}

double g_val(double x, double y) { return exp_remainder2(std::fabs(x * y)); }

double h_val(const ModelParams& p, double x, double y) {
  return 0.5 * p.mu1 * g_val(x, x) + p.beta * g_val(x, y) + 0.5 * p.mu2 * g_val(y, y);
}

PotentialGradient h_grad(const ModelParams& p, double x, double y) {
  const double axy = std::fabs(x * y);
  const double cross = p.beta * expm1_capped(axy);
  PotentialGradient g;
  g.hx = p.mu1 * x * expm1_capped(x * x);
  g.hy = p.mu2 * y * expm1_capped(y * y);
  // the coupling term vanishes at x = 0 (resp. y = 0); copysign keeps sgn(0) harmless
  if (x != 0.0) g.hx += std::copysign(1.0, x) * std::fabs(y) * cross;
  if (y != 0.0) g.hy += std::copysign(1.0, y) * std::fabs(x) * cross;
  return g;
}

PotentialHessian h_hess(const ModelParams& p, double x, double y) {
  if (x < 0.0 || y < 0.0) throw DomainError("h_hess: arguments must be nonnegative");
  const double xx = x * x;
  const double yy = y * y;
  const double xy = x * y;
  const double em_xx = expm1_capped(xx);
  const double em_yy = expm1_capped(yy);
  const double em_xy = expm1_capped(xy);
  PotentialHessian h;
  h.hxx = p.mu1 * em_xx + 2.0 * p.mu1 * xx * (em_xx + 1.0) + p.beta * yy * (em_xy + 1.0);
  h.hyy = p.mu2 * em_yy + 2.0 * p.mu2 * yy * (em_yy + 1.0) + p.beta * xx * (em_xy + 1.0);
  h.hxy = p.beta * em_xy + p.beta * xy * (em_xy + 1.0);
  return h;
}

double quadratic_part(const Grid& grid, const Field& u, double lambda) {
  return h1_inner(grid, u, u, lambda);
}

double energy(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "energy");
  require_on_grid(grid, v, "energy");
  double pot = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) pot += h_val(p, u[k], v[k]);
  pot *= grid.h() * grid.h();
  return 0.5 * (quadratic_part(grid, u, p.lambda1) + quadratic_part(grid, v, p.lambda2)) - pot;
}

FieldPair energy_grad(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "energy_grad");
  require_on_grid(grid, v, "energy_grad");
  FieldPair g{neg_laplacian_apply(grid, u), neg_laplacian_apply(grid, v)};
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto hg = h_grad(p, u[k], v[k]);
    g.u[k] += p.lambda1 * u[k] - hg.hx;
    g.v[k] += p.lambda2 * v[k] - hg.hy;
  }
  return g;
}

double scalar_energy(const Grid& grid, double lambda, double mu, const Field& u) {
  require_on_grid(grid, u, "scalar_energy");
  double pot = 0.0;
  for (double x : u) pot += g_val(x, x);
  pot *= grid.h() * grid.h();
  return 0.5 * quadratic_part(grid, u, lambda) - 0.5 * mu * pot;
}

Field scalar_energy_grad(const Grid& grid, double lambda, double mu, const Field& u) {
  Field g = neg_laplacian_apply(grid, u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    g[k] += lambda * u[k] - mu * u[k] * expm1_capped(u[k] * u[k]);
  }
  return g;
}

double nehari_nonlinear(const Grid& grid, const Field& u, double t) {
  require_on_grid(grid, u, "nehari_nonlinear");
  double s = 0.0;
  for (double x : u) {
    const double x2 = x * x;
    s += x2 * expm1_capped(t * x2);
  }
  return s * grid.h() * grid.h();
}

namespace {
constexpr double kSlack = 1e-12;

bool leq(double lhs, double rhs) {
  return lhs <= rhs + kSlack * std::max(std::fabs(lhs), std::fabs(rhs));
}
}  // namespace

ExponentialBounds check_exponential_bounds(double x, double y) {
  if (x < 0.0 || y < 0.0) throw DomainError("check_exponential_bounds: arguments must be nonnegative");
  ExponentialBounds out;
  const double exy = expm1_capped(x * y);
  out.product_bound = leq(exy * exy, expm1_capped(x * x) * expm1_capped(y * y));
  const double gxy = g_val(x, y);
  out.remainder_bound = leq(gxy * gxy, g_val(x, x) * g_val(y, y));
  out.secant_bound = true;
  for (double z : {x, y, x * y}) {
    const double lhs = 2.0 * exp_remainder2(z);
    out.secant_bound = out.secant_bound && lhs >= 0.0 && leq(lhs, z * expm1_capped(z));
  }
  return out;
}

bool check_euler_bound(const ModelParams& p, double x, double y) {
  const auto g = h_grad(p, x, y);
  return leq(4.0 * h_val(p, x, y), x * g.hx + y * g.hy);
}

double k_p(const Grid& grid, const ModelParams& p, const Field& u, const Field& v, double pexp) {
  require_on_grid(grid, u, "k_p");
  require_on_grid(grid, v, "k_p");
  if (!(pexp >= 2.0 && pexp <= 4.0)) throw DomainError("k_p: exponent must lie in [2, 4]");
  const double half_p = 0.5 * pexp;
  double self1 = 0.0;
  double self2 = 0.0;
  double cross = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = u[k] * u[k];
    const double b = v[k] * v[k];
    const double c = std::fabs(u[k] * v[k]);
    self1 += a * expm1_capped(a) - half_p * exp_remainder2(a);
    self2 += b * expm1_capped(b) - half_p * exp_remainder2(b);
    cross += c * expm1_capped(c) - half_p * exp_remainder2(c);
  }
  const double h2 = grid.h() * grid.h();
  return h2 / pexp * (p.mu1 * self1 + p.mu2 * self2 + 2.0 * p.beta * cross);
}

}  // namespace mosersys
