// Strong cooperation: least energy on the diagonal Nehari set.

#include <algorithm>
#include <cmath>

#include "mosersys/constants.hpp"
#include "mosersys/errors.hpp"
#include "mosersys/system.hpp"
#include "system_detail.hpp"

namespace mosersys {

namespace {

constexpr double kCollapseRatio = 1e-8;

FieldPair onto_diagonal_fiber(const Grid& grid, const ModelParams& p, FieldPair x) {
  const double t = std::sqrt(fiber_root_diag(grid, p, x.u, x.v));
  x.u *= t;
  x.v *= t;
  return x;
}

detail::PairDescentResult descend_from(const Grid& grid, const ModelParams& p, FieldPair start,
                                       const SystemOptions& opts) {
  const double mass_u0 = detail::l2_norm(grid, start.u);
  const double mass_v0 = detail::l2_norm(grid, start.v);
  detail::PairProblem problem;
  problem.project = [&](FieldPair x) {
    x.u = abs(std::move(x.u));
    x.v = abs(std::move(x.v));
    return onto_diagonal_fiber(grid, p, std::move(x));
  };
  problem.energy = [&](const FieldPair& x) { return energy(grid, p, x.u, x.v); };
  problem.residual = [&](const FieldPair& x) { return energy_grad(grid, p, x.u, x.v); };
  problem.on_accept = [&](const FieldPair& x) {
    const double mu = detail::l2_norm(grid, x.u);
    const double mv = detail::l2_norm(grid, x.v);
    if (mu < kCollapseRatio * mass_u0 || mv < kCollapseRatio * mass_v0) {
      throw CollapseError("solve_large_beta: one component collapsed", std::min(mu, mv), 0);
    }
  };
  return detail::descend_pair(grid, std::move(start), problem, opts);
}

}  // namespace

SystemSolution solve_large_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                const SystemOptions& opts) {
  detail::require_seeds(grid, seeds);
  p.require_admissible(seeds.lambda_domain);
  if (!(p.beta > 0.0)) throw HypothesisError("solve_large_beta: beta must be positive");

  const double e1 = seeds.first.energy;
  const double e2 = seeds.second.energy;
  const double beta5 = quartic_threshold(grid, seeds.first);
  const double beta6 = quartic_threshold(grid, seeds.second);
  const double beta_bar0 = 4.0 * std::max(e1 * beta5, e2 * beta6) / std::min(e1, e2);

  // diagonal seed built from the component with the larger lambda
  const Field& diag = p.lambda1 >= p.lambda2 ? seeds.first.u : seeds.second.u;
  const FieldPair diag_seed = onto_diagonal_fiber(grid, p, {diag, diag});
  const double diag_level = energy(grid, p, diag_seed.u, diag_seed.v);

  FieldPair primary = onto_diagonal_fiber(grid, p, {seeds.first.u, seeds.second.u});
  const double initial_level = energy(grid, p, primary.u, primary.v);
  detail::PairDescentResult res;
  bool retried = false;
  try {
    res = descend_from(grid, p, std::move(primary), opts);
  } catch (const CollapseError&) {
    retried = true;
    res = descend_from(grid, p, diag_seed, opts);
  }

  SystemSolution sol;
  sol.u = std::move(res.state.u);
  sol.v = std::move(res.state.v);
  sol.params = p;
  sol.regime = Regime::LargePositive;
  sol.iterations = res.iterations;
  sol.initial_level = retried ? diag_level : initial_level;
  detail::fill_diagnostics(grid, sol);

  // on the diagonal Nehari set the two constraint slots both carry <I'(w), w> / Q
  const double q = quadratic_part(grid, sol.u, p.lambda1) + quadratic_part(grid, sol.v, p.lambda2);
  const auto gc = constraints_g(grid, p, sol.u, sol.v);
  const double nehari = std::fabs(gc[0] + gc[1]) / q;
  sol.constraint_residuals = {nehari, nehari};

  const double d = sol.level;
  const double lam = seeds.lambda_domain;
  const double coercive = std::min({1.0, (p.lambda1 + lam) / lam, (p.lambda2 + lam) / lam});
  const double norm2 = dirichlet_energy(grid, sol.u) + dirichlet_energy(grid, sol.v);
  const double decay_bound = 4.0 * std::max(e1 * beta5, e2 * beta6);
  const bool above_threshold = p.beta >= beta_bar0;

  detail::add(sol, "nehari_membership", nehari <= 1e-8, nehari, 1e-8);
  detail::add(sol, "both_components_nontrivial",
              std::min(detail::l2_norm(grid, sol.u), detail::l2_norm(grid, sol.v)) > 0.0,
              std::min(detail::l2_norm(grid, sol.u), detail::l2_norm(grid, sol.v)), 0.0);
  detail::add(sol, "level_below_min_scalar",
              above_threshold ? d < std::min(e1, e2) : d <= std::min(e1, e2), d, std::min(e1, e2));
  if (above_threshold) {
    detail::add(sol, "beta_level_decay_bound", p.beta * d <= decay_bound * 1.02, p.beta * d, decay_bound);
  }
  detail::add(sol, "level_below_diagonal_seed", d <= diag_level * (1.0 + 1e-12), d, diag_level);
  detail::add(sol, "energy_norm_bound", 0.25 * coercive * norm2 <= d * (1.0 + 1e-10),
              0.25 * coercive * norm2, d);
  detail::add(sol, "interior_positive", min_value(sol.u) > 0.0 && min_value(sol.v) > 0.0,
              std::min(min_value(sol.u), min_value(sol.v)), 0.0);
  return sol;
}

}  // namespace mosersys
