// Weak cooperation: least energy on the two-constraint set.

#include <algorithm>
#include <cmath>
#include <limits>

#include "mosersys/constants.hpp"
#include "mosersys/errors.hpp"
#include "mosersys/system.hpp"
#include "system_detail.hpp"

namespace mosersys {

namespace {

constexpr double kCollapseRatio = 1e-8;

FieldPair scale_pair(FieldPair x, const FiberCoords& c) {
  x.u *= std::sqrt(c.t);
  x.v *= std::sqrt(c.s);
  return x;
}

// grad I - alpha1 grad G1 - alpha2 grad G2, with alpha chosen so the result
// annihilates both fiber directions (u, 0) and (0, v).
FieldPair constrained_direction(const Grid& grid, const ModelParams& p, const FieldPair& x) {
  FieldPair g = energy_grad(grid, p, x.u, x.v);
  const auto gc = constraints_g(grid, p, x.u, x.v);
  const Matrix2 jm = matrix_j(grid, p, x.u, x.v);
  const double det = jm.det();
  if (!(det > 0.0)) return g;
  const double a1 = (-gc[0] * jm.b + gc[1] * jm.c) / det;
  const double a2 = (-gc[1] * jm.a + gc[0] * jm.c) / det;
  const Field lu = neg_laplacian_apply(grid, x.u);
  const Field lv = neg_laplacian_apply(grid, x.v);
  for (std::size_t k = 0; k < x.u.size(); ++k) {
    const double u = x.u[k];
    const double v = x.v[k];
    const auto hg = h_grad(p, u, v);
    const auto hh = h_hess(p, u, v);
    const double g1u = 2.0 * (lu[k] + p.lambda1 * u) - hg.hx - u * hh.hxx;
    const double g1v = -u * hh.hxy;
    const double g2u = -v * hh.hxy;
    const double g2v = 2.0 * (lv[k] + p.lambda2 * v) - hg.hy - v * hh.hyy;
    g.u[k] -= a1 * g1u + a2 * g2u;
    g.v[k] -= a1 * g1v + a2 * g2v;
  }
  return g;
}

}  // namespace

SystemSolution solve_small_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                const SystemOptions& opts) {
  detail::require_seeds(grid, seeds);
  p.require_admissible(seeds.lambda_domain);
  if (!(p.beta > 0.0) || !(p.beta < p.sqrt_mu1mu2())) {
    throw HypothesisError("solve_small_beta: need 0 < beta < sqrt(mu1 mu2)");
  }
  const double e_sum = seeds.first.energy + seeds.second.energy;

  // Start from the scaling maximiser of I(sqrt(t) u1, sqrt(s) u2).
  const FieldPair seed{seeds.first.u, seeds.second.u};
  FieldPair start = scale_pair(seed, project_m_beta(grid, p, seed.u, seed.v));
  const double initial_level = energy(grid, p, start.u, start.v);
  const double mass_u0 = detail::l2_norm(grid, start.u);
  const double mass_v0 = detail::l2_norm(grid, start.v);

  bool det_ok = true;
  double worst_det_margin = std::numeric_limits<double>::infinity();
  auto check_det = [&](const FieldPair& x) {
    const double det = matrix_j(grid, p, x.u, x.v).det();
    const double bound = det_lower_bound(grid, p, x.u, x.v);
    const double margin = det - bound;
    worst_det_margin = std::min(worst_det_margin, margin / std::max(std::fabs(bound), 1e-300));
    if (margin < -1e-10 * std::max(std::fabs(det), std::fabs(bound))) det_ok = false;
  };
  check_det(start);

  detail::PairProblem problem;
  problem.project = [&](FieldPair x) {
    x.u = abs(std::move(x.u));
    x.v = abs(std::move(x.v));
    return scale_pair(std::move(x), project_m_beta(grid, p, x.u, x.v));
  };
  problem.energy = [&](const FieldPair& x) { return energy(grid, p, x.u, x.v); };
  problem.residual = [&](const FieldPair& x) { return energy_grad(grid, p, x.u, x.v); };
  problem.direction = [&](const FieldPair& x) { return constrained_direction(grid, p, x); };
  problem.on_accept = [&](const FieldPair& x) {
    const double mu = detail::l2_norm(grid, x.u);
    const double mv = detail::l2_norm(grid, x.v);
    if (mu < kCollapseRatio * mass_u0 || mv < kCollapseRatio * mass_v0) {
      throw CollapseError("solve_small_beta: one component collapsed", std::min(mu, mv), 0);
    }
    check_det(x);
  };

  auto res = detail::descend_pair(grid, std::move(start), problem, opts);

  SystemSolution sol;
  sol.u = std::move(res.state.u);
  sol.v = std::move(res.state.v);
  sol.params = p;
  sol.regime = Regime::SmallPositive;
  sol.iterations = res.iterations;
  sol.initial_level = initial_level;
  detail::fill_diagnostics(grid, sol);

  const double a_sum = quadratic_part(grid, sol.u, p.lambda1) + quadratic_part(grid, sol.v, p.lambda2);
  const auto gc = constraints_g(grid, p, sol.u, sol.v);
  const double mass_u = lp_integral(grid, sol.u, 2.0);
  const double mass_v = lp_integral(grid, sol.v, 2.0);
  const auto b = [&] {
    BetaThresholds t;
    t.beta1 = cross_threshold(grid, seeds.first, seeds.second.u);
    t.beta2 = cross_threshold(grid, seeds.second, seeds.first.u);
    return t;
  }();
  const double range = std::min({b.beta1, b.beta2, p.sqrt_mu1mu2()});

  detail::add(sol, "beta_in_small_range", p.beta < range, p.beta, range);
  detail::add(sol, "both_components_nontrivial", std::min(mass_u, mass_v) > 1e-3,
              std::min(mass_u, mass_v), 1e-3);
  detail::add(sol, "constraint_set_membership", std::fabs(gc[0]) + std::fabs(gc[1]) <= 1e-8 * a_sum,
              std::fabs(gc[0]) + std::fabs(gc[1]), 1e-8 * a_sum);
  detail::add(sol, "level_below_scalar_sum", sol.level < e_sum - 1e-10, sol.level, e_sum);
  detail::add(sol, "level_below_initial", sol.level <= initial_level + 1e-12 * std::fabs(initial_level),
              sol.level, initial_level);
  detail::add(sol, "det_j_bound_every_iterate", det_ok, worst_det_margin, 0.0);
  detail::add(sol, "interior_positive", min_value(sol.u) > 0.0 && min_value(sol.v) > 0.0,
              std::min(min_value(sol.u), min_value(sol.v)), 0.0);
  return sol;
}

}  // namespace mosersys
