// Weak competition: a local minimax near the pair of scalar ground states,
// carried out for the positive-part functional.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "mosersys/errors.hpp"
#include "mosersys/system.hpp"
#include "system_detail.hpp"

namespace mosersys {

namespace {

constexpr double kCollapseRatio = 1e-8;

// J(s u1, t u2) split into pieces that depend on s alone, t alone and the
// product st alone, so a tensor grid of amplitudes costs one pass per axis
// value plus one per distinct product.
class AmplitudeFamily {
 public:
  AmplitudeFamily(const Grid& grid, const ModelParams& p, const Field& u1, const Field& u2)
      : p_(p), h2_(grid.h() * grid.h()) {
    a1_ = quadratic_part(grid, u1, p.lambda1);
    a2_ = quadratic_part(grid, u2, p.lambda2);
    for (std::size_t k = 0; k < u1.size(); ++k) {
      const double x = std::max(u1[k], 0.0);
      const double y = std::max(u2[k], 0.0);
      sq1_.push_back(x * x);
      sq2_.push_back(y * y);
      cross_.push_back(x * y);
    }
  }
  // each piece is -infinity once an exponent passes the overflow cap
  double first(double s) const { return 0.5 * s * s * a1_ - 0.5 * p_.mu1 * h2_ * remainder_sum(sq1_, s * s); }
  double second(double t) const { return 0.5 * t * t * a2_ - 0.5 * p_.mu2 * h2_ * remainder_sum(sq2_, t * t); }
  double coupling(double st) const { return -p_.beta * h2_ * remainder_sum(cross_, st); }
  double operator()(double s, double t) const { return first(s) + second(t) + coupling(s * t); }

 private:
  static double remainder_sum(const std::vector<double>& w, double scale) {
    double sum = 0.0;
    for (double x : w) {
      const double z = scale * x;
      if (z > kOverflowCap) return std::numeric_limits<double>::infinity();
      sum += exp_remainder2(z);
    }
    return sum;
  }

  const ModelParams& p_;
  double h2_;
  double a1_ = 0.0, a2_ = 0.0;
  std::vector<double> sq1_, sq2_, cross_;
};

}  // namespace

LevelBoxMax level_box_max(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                          const SystemOptions& opts) {
  detail::require_seeds(grid, seeds);
  if (opts.level_grid_points < 2) throw DomainError("level_box_max: need at least 2 points per axis");
  if (!(opts.level_box_low > 0.0 && opts.level_box_low < 1.0 && opts.level_box_high > 1.0)) {
    throw DomainError("level_box_max: box must satisfy 0 < low < 1 < high");
  }
  const AmplitudeFamily family(grid, p, seeds.first.u, seeds.second.u);
  auto safe = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  LevelBoxMax out;
  double high = opts.level_box_high;
  // the upper corner must already lie below zero
  for (int k = 0; k < 20; ++k) {
    out.corner_value = safe(family(high, high));
    if (out.corner_value < 0.0) break;
    high *= 1.5;
  }
  out.box_high = high;
  const double low = opts.level_box_low;
  const int n = opts.level_grid_points;
  std::vector<double> axis(n), first(n), second(n);
  for (int i = 0; i < n; ++i) {
    axis[i] = low + (high - low) * i / (n - 1);
    first[i] = family.first(axis[i]);
    second[i] = family.second(axis[i]);
  }
  std::map<double, double> coupling;
  out.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double st = axis[i] * axis[j];
      auto it = coupling.find(st);
      if (it == coupling.end()) it = coupling.emplace(st, family.coupling(st)).first;
      const double value = safe(first[i] + second[j] + it->second);
      if (value > out.value) {
        out.value = value;
        out.s = axis[i];
        out.t = axis[j];
      }
    }
  }
  // polish: the interior maximiser is the scaling that lands on the constraint set
  try {
    const FiberCoords c = project_m_beta(grid, p, seeds.first.u, seeds.second.u);
    const double s = std::sqrt(c.t);
    const double t = std::sqrt(c.s);
    if (s >= low && s <= high && t >= low && t <= high) {
      const double value = safe(family(s, t));
      if (value > out.value) {
        out.value = value;
        out.s = s;
        out.t = t;
      }
    }
  } catch (const ProjectionError&) {
    // grid value stands
  }
  return out;
}

SystemSolution solve_negative_beta(const Grid& grid, const ModelParams& p, const Seeds& seeds,
                                   const SystemOptions& opts) {
  detail::require_seeds(grid, seeds);
  p.require_admissible(seeds.lambda_domain);
  const double smm = p.sqrt_mu1mu2();
  if (!(p.beta < 0.0) || !(p.beta > -smm)) {
    throw HypothesisError("solve_negative_beta: need -sqrt(mu1 mu2) < beta < 0");
  }
  if (-p.beta > opts.beta_negative_cap * smm) {
    throw HypothesisError("solve_negative_beta: |beta| exceeds the configured cap");
  }
  const Field& u1 = seeds.first.u;
  const Field& u2 = seeds.second.u;
  const double radius = opts.trust_radius > 0.0
                            ? opts.trust_radius
                            : 0.5 * std::min(std::sqrt(dirichlet_energy(grid, u1)),
                                             std::sqrt(dirichlet_energy(grid, u2)));

  auto scale = [](FieldPair x, const FiberCoords& c) {
    x.u *= std::sqrt(c.t);
    x.v *= std::sqrt(c.s);
    return x;
  };
  FieldPair start = scale({u1, u2}, project_m_beta(grid, p, u1, u2));
  const double initial_level = energy_tilde(grid, p, start.u, start.v);
  const double mass_u0 = detail::l2_norm(grid, start.u);
  const double mass_v0 = detail::l2_norm(grid, start.v);
  double max_distance = detail::h1_distance(grid, start, u1, u2);
  if (max_distance > radius) {
    throw RegimeError("solve_negative_beta: projected start already outside the trust region",
                      max_distance, 0);
  }

  detail::PairProblem problem;
  problem.project = [&](FieldPair x) {
    x.u = abs(std::move(x.u));
    x.v = abs(std::move(x.v));
    return scale(std::move(x), project_m_beta(grid, p, x.u, x.v));
  };
  problem.energy = [&](const FieldPair& x) { return energy_tilde(grid, p, x.u, x.v); };
  problem.residual = [&](const FieldPair& x) { return grad_tilde(grid, p, x.u, x.v); };
  problem.on_accept = [&](const FieldPair& x) {
    const double mu = detail::l2_norm(grid, x.u);
    const double mv = detail::l2_norm(grid, x.v);
    if (mu < kCollapseRatio * mass_u0 || mv < kCollapseRatio * mass_v0) {
      throw CollapseError("solve_negative_beta: one component collapsed", std::min(mu, mv), 0);
    }
    const double dist = detail::h1_distance(grid, x, u1, u2);
    max_distance = std::max(max_distance, dist);
    if (dist > radius) {
      throw RegimeError("solve_negative_beta: iterate left the trust region around the seeds", dist, 0);
    }
  };
  auto res = detail::descend_pair(grid, std::move(start), problem, opts);

  SystemSolution sol;
  sol.u = std::move(res.state.u);
  sol.v = std::move(res.state.v);
  sol.params = p;
  sol.regime = Regime::Negative;
  sol.iterations = res.iterations;
  sol.initial_level = initial_level;
  detail::fill_diagnostics(grid, sol);
  sol.level = energy_tilde(grid, p, sol.u, sol.v);

  const auto box = level_box_max(grid, p, seeds, opts);
  const double a_sum = quadratic_part(grid, sol.u, p.lambda1) + quadratic_part(grid, sol.v, p.lambda2);
  const auto gc = constraints_g(grid, p, sol.u, sol.v);
  const double dist = detail::h1_distance(grid, {sol.u, sol.v}, u1, u2);
  const double min_interior = std::min(min_value(sol.u), min_value(sol.v));

  detail::add(sol, "both_components_nontrivial",
              std::min(detail::l2_norm(grid, sol.u), detail::l2_norm(grid, sol.v)) > 0.0,
              std::min(detail::l2_norm(grid, sol.u), detail::l2_norm(grid, sol.v)), 0.0);
  detail::add(sol, "interior_positive", min_interior > 0.0, min_interior, 0.0);
  detail::add(sol, "within_trust_region", dist <= radius, dist, radius);
  detail::add(sol, "constraint_set_membership", std::fabs(gc[0]) + std::fabs(gc[1]) <= 1e-8 * a_sum,
              std::fabs(gc[0]) + std::fabs(gc[1]), 1e-8 * a_sum);
  detail::add(sol, "box_corner_negative", box.corner_value < 0.0, box.corner_value, 0.0);
  detail::add(sol, "level_below_box_max", sol.level <= box.value * (1.0 + 1e-12), sol.level, box.value);
  return sol;
}

}  // namespace mosersys
