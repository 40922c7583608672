#include "mosersys/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mosersys/errors.hpp"

namespace mosersys {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;
}  // namespace

double cross_threshold(const Grid& grid, const GroundState& self, const Field& partner) {
  require_on_grid(grid, self.u, "cross_threshold");
  require_on_grid(grid, partner, "cross_threshold");
  double overlap = 0.0;
  for (std::size_t k = 0; k < partner.size(); ++k) {
    overlap += self.u[k] * self.u[k] * partner[k] * partner[k];
  }
  overlap *= grid.h() * grid.h();
  if (!(overlap > 0.0)) throw DegenerateOverlapError("ground states have no overlap");
  return self.mu * nehari_nonlinear(grid, self.u) / overlap;
}

double quartic_threshold(const Grid& grid, const GroundState& self) {
  const double q = lp_integral(grid, self.u, 4.0);
  if (!(q > 0.0)) throw DegenerateOverlapError("ground state vanishes");
  return self.mu * nehari_nonlinear(grid, self.u) / q;
}

double BetaThresholds::small_range() const { return std::min({beta1, beta2, beta3, beta4}); }

BetaThresholds beta_thresholds(const Grid& grid, const GroundState& gs1, const GroundState& gs2,
                               const ModelParams& p, double lambda_domain, double s4) {
  p.validate();
  BetaThresholds b;
  b.beta1 = cross_threshold(grid, gs1, gs2.u);
  b.beta2 = cross_threshold(grid, gs2, gs1.u);
  const double e_sum = gs1.energy + gs2.energy;
  if (!(e_sum > 0.0)) throw DomainError("beta_thresholds: scalar levels must be positive");
  const double f1 = std::min(0.5, (p.lambda1 + lambda_domain) / (2.0 * lambda_domain));
  const double f2 = std::min(0.5, (p.lambda2 + lambda_domain) / (2.0 * lambda_domain));
  b.beta3 = s4 * f1 * std::sqrt(p.mu2 / e_sum);
  b.beta4 = s4 * f2 * std::sqrt(p.mu1 / e_sum);
  b.beta5 = quartic_threshold(grid, gs1);
  b.beta6 = quartic_threshold(grid, gs2);
  b.beta_bar0 = 4.0 * std::max(gs1.energy * b.beta5, gs2.energy * b.beta6) /
                std::min(gs1.energy, gs2.energy);
  return b;
}

CGammaBranches c_gamma_branches(double gamma) {
  if (!(gamma > 0.0 && gamma < kFourPi)) throw DomainError("c_gamma: gamma must lie in (0, 4 pi)");
  const double gap = kFourPi - gamma;
  CGammaBranches c;
  c.exponential = kFourPi * std::expm1(gamma / kFourPi);
  c.rational = kFourPi * 16.0 * kPi * (kFourPi + gamma) / (gap * gap) * std::exp(2.0 * gamma / gap);
  return c;
}

double c_gamma(double gamma) {
  const auto c = c_gamma_branches(gamma);
  return std::max(c.exponential, c.rational);
}

IntegralBound check_integral_bound(const Grid& grid, const Field& u, double gamma) {
  require_on_grid(grid, u, "check_integral_bound");
  const double grad2 = dirichlet_energy(grid, u);
  if (grad2 > 1.0 + 1e-12) throw DomainError("check_integral_bound: requires ||grad u||_2 <= 1");
  IntegralBound out;
  if (grad2 == 0.0) {
    out.holds = true;
    return out;
  }
  out.lhs = nehari_nonlinear(grid, u, gamma);
  out.rhs = c_gamma(gamma) * lp_integral(grid, u, 4.0);
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-10);
  return out;
}

// ---------------------------------------------------------------------------
// critical Moser level

double moser_profile(double r, double radius, double rho) {
  const double log_inv = -std::log(rho);
  if (r >= radius) return 0.0;
  if (r <= rho * radius) return std::sqrt(log_inv / (2.0 * kPi));
  return std::log(radius / r) / std::sqrt(2.0 * kPi * log_inv);
}

double moser_profile_mass(double radius, double rho) {
  const double log_inv = -std::log(rho);
  return radius * radius * ((1.0 - rho * rho) / (4.0 * log_inv) - 0.5 * rho * rho);
}

namespace {

// int_{R^2} (e^{4 pi A^2 m^2} - 1) for the scaled profile A m; the annulus part
// is integrated in x = log(R/r) with composite Simpson.
double critical_trial(double radius, double rho, int nodes) {
  const double log_inv = -std::log(rho);
  const double amp2 = 1.0 / (1.0 + moser_profile_mass(radius, rho));
  const double plateau = kPi * rho * rho * radius * radius * std::expm1(2.0 * amp2 * log_inv);
  const int intervals = (nodes - 1) % 2 == 0 ? nodes - 1 : nodes;
  const double dx = log_inv / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = i * dx;
    const double f = std::expm1(2.0 * amp2 * x * x / log_inv) * std::exp(-2.0 * x);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * f;
  }
  return plateau + 2.0 * kPi * radius * radius * sum * dx / 3.0;
}

// geometric grid lo..hi with (base << level) intervals; nested across levels
std::vector<double> nested_grid(double lo, double hi, int base, int level) {
  const int intervals = base << level;
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(intervals) + 1);
  const double ratio = std::log(hi / lo);
  for (int i = 0; i <= intervals; ++i) g.push_back(lo * std::exp(ratio * i / intervals));
  return g;
}

}  // namespace

D4piBound d4pi_lower_bounds(int profile_grid_n, int family_level, double lambda_domain, double s4) {
  if (profile_grid_n < 256) throw DomainError("d4pi: profile_grid_n must be at least 256");
  if (family_level < 0 || family_level > 8) throw DomainError("d4pi: family level must lie in [0, 8]");
  D4piBound out;
  for (double radius : nested_grid(1.0 / 16.0, 16.0, 8, family_level)) {
    for (double rho : nested_grid(1e-8, 0.5, 8, family_level)) {
      const double value = critical_trial(radius, rho, profile_grid_n);
      if (value > out.trial) {
        out.trial = value;
        out.radius = radius;
        out.rho = rho;
      }
    }
  }
  if (lambda_domain > 0.0 && s4 > 0.0) {
    out.rearranged = (kFourPi - 1.0) * lambda_domain / (2.0 * s4 * s4);
  }
  out.best = std::max(out.trial, out.rearranged);
  return out;
}

double d4pi_trial_lower_bound(int profile_grid_n, int family_level) {
  return d4pi_lower_bounds(profile_grid_n, family_level, 0.0, 0.0).trial;
}

double beta_star_lower_bound(const ModelParams& p, double lambda_domain, double d4pi) {
  p.validate();
  if (!(d4pi > 0.0)) throw DomainError("beta_star_lower_bound: d4pi must be positive");
  if (!(lambda_domain > 0.0)) throw DomainError("beta_star_lower_bound: Lambda1 must be positive");
  p.require_admissible(lambda_domain);
  const double r1 = (p.lambda1 + lambda_domain) / lambda_domain;
  const double r2 = (p.lambda2 + lambda_domain) / lambda_domain;
  const double mm = p.mu1 * p.mu2 / 32.0;
  const double moser = (kFourPi - 1.0) * lambda_domain / (kPi * d4pi);
  const double c = std::exp(-1.0 / 3.0) / 48.0;
  return std::min({std::sqrt(mm), std::sqrt(mm * r1), c * std::sqrt(moser * p.mu2) * std::min(1.0, r1),
                   std::sqrt(mm * r2), c * std::sqrt(moser * p.mu1) * std::min(1.0, r2),
                   std::sqrt(moser * p.mu2 / 32.0) * std::min(1.0, r1),
                   std::sqrt(moser * p.mu1 / 32.0) * std::min(1.0, r2)});
}

double energy_lower_band(double lambda, double mu, double lambda_domain, double s4) {
  const double ratio = (lambda + lambda_domain) / lambda_domain;
  const double sob = std::min(0.5, 0.5 * ratio) * s4;
  return std::min({kPi / 4.0, kPi / 4.0 * ratio, std::exp(-2.0 / 3.0) / (36.0 * mu) * sob * sob});
}

ThresholdReport build_threshold_report(const Grid& grid, const ModelParams& p,
                                       const GroundState& gs1, const GroundState& gs2,
                                       double lambda_domain, double s4,
                                       std::optional<double> d4pi_config, int profile_grid_n,
                                       int family_level) {
  ThresholdReport r;
  r.lambda1_domain = lambda_domain;
  r.s4 = s4;
  r.e1 = gs1.energy;
  r.e2 = gs2.energy;
  r.betas = beta_thresholds(grid, gs1, gs2, p, lambda_domain, s4);
  r.d4pi = d4pi_lower_bounds(profile_grid_n, family_level, lambda_domain, s4);
  r.d4pi_config = d4pi_config;
  r.d4pi_from_config = d4pi_config.has_value();
  r.d4pi_used = d4pi_config.value_or(r.d4pi.best);
  r.beta_star_formula = beta_star_lower_bound(p, lambda_domain, r.d4pi_used);
  r.e1_band = energy_lower_band(p.lambda1, p.mu1, lambda_domain, s4);
  r.e2_band = energy_lower_band(p.lambda2, p.mu2, lambda_domain, s4);
  const double two_pi = 2.0 * kPi;
  r.energies_in_band = r.e1 > 0.0 && r.e1 < two_pi && r.e2 > 0.0 && r.e2 < two_pi;
  for (int k = 1; k <= 15; ++k) {
    const double gamma = kFourPi * k / 16.0;
    r.c_gamma_table.emplace_back(gamma, c_gamma(gamma));
  }
  return r;
}

}  // namespace mosersys
