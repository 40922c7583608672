#pragma once

// Coupling thresholds, the constants of the exponential integral inequalities,
// trial lower bounds for the critical Moser level and the Moser sequence check.

#include <optional>
#include <utility>
#include <vector>

#include "mosersys/grid.hpp"
#include "mosersys/nonlin.hpp"
#include "mosersys/scalar.hpp"

namespace mosersys {

/// mu int u^2 (e^{u^2} - 1) / int u^2 w^2 for the state u and a partner w.
/// Throws DegenerateOverlapError when the overlap integral vanishes.
double cross_threshold(const Grid& grid, const GroundState& self, const Field& partner);
/// mu int u^2 (e^{u^2} - 1) / int u^4
double quartic_threshold(const Grid& grid, const GroundState& self);

struct BetaThresholds {
  double beta1 = 0.0, beta2 = 0.0;  ///< cross-overlap ratios
  double beta3 = 0.0, beta4 = 0.0;  ///< Sobolev-constant thresholds
  double beta5 = 0.0, beta6 = 0.0;  ///< self-quartic ratios
  double beta_bar0 = 0.0;           ///< large-coupling threshold
  /// Upper end of the small-coupling range without the non-constructive limit.
  double small_range() const;
};

BetaThresholds beta_thresholds(const Grid& grid, const GroundState& gs1, const GroundState& gs2,
                               const ModelParams& p, double lambda_domain, double s4);

struct CGammaBranches {
  double exponential = 0.0;  ///< 4 pi (e^{gamma/4pi} - 1)
  double rational = 0.0;     ///< 4 pi 16 pi (4pi+gamma)/(4pi-gamma)^2 e^{2 gamma/(4pi - gamma)}
};
CGammaBranches c_gamma_branches(double gamma);
/// max of the two branches; gamma in (0, 4 pi).
double c_gamma(double gamma);

struct IntegralBound {
  double lhs = 0.0;  ///< int u^2 (e^{gamma u^2} - 1)
  double rhs = 0.0;  ///< C(gamma) ||u||_4^4
  bool holds = false;
};
/// Requires ||grad u||_2 <= 1 (1e-12 slack).
IntegralBound check_integral_bound(const Grid& grid, const Field& u, double gamma);

/// Radial truncated-log profile: plateau sqrt(L/2pi) on r <= rho R, then
/// log(R/r)/sqrt(2 pi L) on rho R < r < R, with L = log(1/rho). Unit Dirichlet energy.
double moser_profile(double r, double radius, double rho);
/// Its squared L^2 norm over the plane.
double moser_profile_mass(double radius, double rho);

struct D4piBound {
  double trial = 0.0;       ///< best evaluated feasible trial value
  double rearranged = 0.0;  ///< (4 pi - 1) Lambda1 / (2 S4^2)
  double best = 0.0;        ///< max of the two
  double radius = 0.0;      ///< maximising trial parameters
  double rho = 0.0;
};
/// Max over a (radius, rho) family grid of int (e^{4 pi u^2} - 1) for feasible
/// radial trials; the parameter grids at level k are contained in level k+1.
double d4pi_trial_lower_bound(int profile_grid_n, int family_level = 2);
D4piBound d4pi_lower_bounds(int profile_grid_n, int family_level, double lambda_domain, double s4);

/// The seven-term minimum evaluated at the supplied d_{4 pi}.
double beta_star_lower_bound(const ModelParams& p, double lambda_domain, double d4pi);

/// A priori lower band for the scalar level E_{lambda, mu}.
double energy_lower_band(double lambda, double mu, double lambda_domain, double s4);

struct MoserCheck {
  double sup_estimate = 0.0;  ///< largest trial int e^{alpha u^2}
  bool divergence_witness = false;  ///< alpha > 4 pi and a trial exceeded 1e6 |Omega|
  bool resolution_limited = false;  ///< trials stopped because the plateau fell below h
  std::vector<double> trial_values;
  std::vector<double> plateau_radii;
};
/// Moser-sequence trials sampled on the grid and normalised to unit discrete
/// Dirichlet energy; the plateau radius halves from trial to trial.
MoserCheck moser_sup_check(const Grid& grid, double alpha, int trials);

struct ThresholdReport {
  double lambda1_domain = 0.0;
  double s4 = 0.0;
  double e1 = 0.0, e2 = 0.0;
  BetaThresholds betas;
  double beta_star_formula = 0.0;
  double d4pi_used = 0.0;
  bool d4pi_from_config = false;
  std::optional<double> d4pi_config;
  D4piBound d4pi;
  double e1_band = 0.0, e2_band = 0.0;
  bool energies_in_band = false;  ///< both levels in (0, 2 pi)
  std::vector<std::pair<double, double>> c_gamma_table;
};

ThresholdReport build_threshold_report(const Grid& grid, const ModelParams& p,
                                       const GroundState& gs1, const GroundState& gs2,
                                       double lambda_domain, double s4,
                                       std::optional<double> d4pi_config, int profile_grid_n = 1025,
                                       int family_level = 2);

}  // namespace mosersys
