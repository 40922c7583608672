#pragma once

// Vector ground states of the coupled system in the three coupling regimes.

#include <array>
#include <string>
#include <vector>

#include "mosersys/grid.hpp"
#include "mosersys/nonlin.hpp"
#include "mosersys/scalar.hpp"

namespace mosersys {

enum class Regime { SmallPositive, LargePositive, Negative };
std::string_view to_string(Regime regime);

struct Certificate {
  std::string name;
  bool passed = false;
  double value = 0.0;  ///< the quantity checked
  double bound = 0.0;  ///< what it was compared against
};

struct SystemSolution {
  Field u;
  Field v;
  ModelParams params;
  Regime regime = Regime::SmallPositive;
  double level = 0.0;
  std::array<double, 2> constraint_residuals{};  ///< |G_i| / A_i, or the diagonal Nehari residual twice
  std::array<double, 2> pde_residuals{};         ///< strong residual per component, relative
  double det_j = 0.0;
  double det_bound = 0.0;
  double initial_level = 0.0;
  int iterations = 0;
  std::vector<Certificate> certificates;

  bool all_certified() const;
  const Certificate* find(std::string_view name) const;
};

struct FiberCoords {
  double t = 1.0;
  double s = 1.0;
};

/// Scalar ground states used to seed and certify the system solvers.
struct Seeds {
  GroundState first;    ///< for (lambda1, mu1)
  GroundState second;   ///< for (lambda2, mu2)
  double lambda_domain = 0.0;  ///< principal Dirichlet eigenvalue of the grid
};

struct SystemOptions {
  double tol = 1e-8;  ///< relative strong residual
  int max_iter = 3000;
  double beta_negative_cap = 0.2;  ///< |beta| <= cap * sqrt(mu1 mu2) in the negative regime
  double trust_radius = 0.0;       ///< 0 selects half the smaller seed gradient norm
  int level_grid_points = 64;      ///< per axis, for the scaling-box maximum
  double level_box_low = 0.5;
  double level_box_high = 2.0;
};

/// (G1, G2) with G1 = int(|grad u|^2 + lambda1 u^2 - u H_u(u, v)).
std::array<double, 2> constraints_g(const Grid& grid, const ModelParams& p, const Field& u,
                                    const Field& v);

struct Matrix2 {
  double a = 0.0;
  double c = 0.0;
  double b = 0.0;
  double det() const { return a * b - c * c; }
};

/// The symmetric matrix of the fiber derivatives of (G1, G2); u, v >= 0.
Matrix2 matrix_j(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);
/// 4 (mu1 mu2 - beta^2) int u^4 e^{u^2} int v^4 e^{v^2}
double det_lower_bound(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

/// (t, s) with (sqrt(t) u, sqrt(s) v) on the two-constraint set. Damped Newton
/// in log coordinates with an alternating-bisection fallback; throws
/// ProjectionError when neither reaches 1e-10 relative residual.
FiberCoords project_m_beta(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

/// The unique critical point t of t -> I(sqrt(t) u, sqrt(t) v); beta > 0.
double fiber_root_diag(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

SystemSolution solve_small_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                const SystemOptions& opts = {});

SystemSolution solve_large_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                const SystemOptions& opts = {});

/// Positive-part functional: H evaluated at (max(u, 0), max(v, 0)).
double energy_tilde(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);
FieldPair grad_tilde(const Grid& grid, const ModelParams& p, const Field& u, const Field& v);

struct LevelBoxMax {
  double value = 0.0;
  double s = 1.0;  ///< amplitude multiplying the first seed
  double t = 1.0;  ///< amplitude multiplying the second seed
  double corner_value = 0.0;  ///< functional at (high, high) amplitudes, must be negative
  double box_high = 0.0;
};

/// Maximum of the positive-part functional over (s u1, t u2) with s, t in the
/// amplitude box, refined at the interior critical point when it lies inside.
LevelBoxMax level_box_max(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                          const SystemOptions& opts = {});

SystemSolution solve_negative_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                   const SystemOptions& opts = {});

}  // namespace mosersys
