#include <algorithm>
#include <cmath>
#include <limits>

#include "mosersys/errors.hpp"
#include "mosersys/system.hpp"
#include "system_detail.hpp"

namespace mosersys {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::SmallPositive: return "small-positive";
    case Regime::LargePositive: return "large-positive";
    case Regime::Negative: return "negative";
  }
  return "unknown";
}

bool SystemSolution::all_certified() const {
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const Certificate& c) { return c.passed; });
}

const Certificate* SystemSolution::find(std::string_view name) const {
  for (const auto& c : certificates) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::array<double, 2> constraints_g(const Grid& grid, const ModelParams& p, const Field& u,
                                    const Field& v) {
  require_on_grid(grid, u, "constraints_g");
  require_on_grid(grid, v, "constraints_g");
  double su = 0.0;
  double sv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto g = h_grad(p, u[k], v[k]);
    su += u[k] * g.hx;
    sv += v[k] * g.hy;
  }
  const double h2 = grid.h() * grid.h();
  return {quadratic_part(grid, u, p.lambda1) - su * h2, quadratic_part(grid, v, p.lambda2) - sv * h2};
}

Matrix2 matrix_j(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "matrix_j");
  require_on_grid(grid, v, "matrix_j");
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double x = u[k];
    const double y = v[k];
    if (x < 0.0 || y < 0.0) throw DomainError("matrix_j: fields must be nonnegative");
    const double xx = x * x;
    const double yy = y * y;
    const double xy = x * y;
    const double e_xy = expm1_capped(xy);
    const double mixed = xx * yy * (e_xy + 1.0);
    const double secant = xy * e_xy;
    a += 2.0 * p.mu1 * xx * xx * (expm1_capped(xx) + 1.0) + p.beta * (mixed - secant);
    b += 2.0 * p.mu2 * yy * yy * (expm1_capped(yy) + 1.0) + p.beta * (mixed - secant);
    c += p.beta * (mixed + secant);
  }
  const double h2 = grid.h() * grid.h();
  return {a * h2, c * h2, b * h2};
}

double det_lower_bound(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  double iu = 0.0;
  double iv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double xx = u[k] * u[k];
    const double yy = v[k] * v[k];
    iu += xx * xx * (expm1_capped(xx) + 1.0);
    iv += yy * yy * (expm1_capped(yy) + 1.0);
  }
  const double h2 = grid.h() * grid.h();
  return 4.0 * (p.mu1 * p.mu2 - p.beta * p.beta) * iu * h2 * iv * h2;
}

// ---------------------------------------------------------------------------
// projection onto the two-constraint set

namespace {

constexpr double kScaleMin = 1e-8;
constexpr double kScaleMax = 1e8;
constexpr double kProjectionTol = 1e-10;

// Integrals along the scaling family (sqrt(t) u, sqrt(s) v), divided by t (resp. s):
//   F1 = A1 - mu1 P1(t) - beta sqrt(s/t) C(sqrt(ts)),  F2 symmetric,
// with P(t) = int u^2 (e^{t u^2} - 1) and C(w) = int |uv| (e^{w |uv|} - 1).
class ScalingSystem {
 public:
  ScalingSystem(const Grid& grid, const ModelParams& p, const Field& u, const Field& v)
      : p_(p), h2_(grid.h() * grid.h()) {
    a1_ = quadratic_part(grid, u, p.lambda1);
    a2_ = quadratic_part(grid, v, p.lambda2);
    if (!(a1_ > 0.0) || !(a2_ > 0.0)) {
      throw HypothesisError("project_m_beta: quadratic parts must be positive");
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double uu = u[k] * u[k];
      const double vv = v[k] * v[k];
      const double uv = std::fabs(u[k] * v[k]);
      if (uu > 0.0) uu_.push_back(uu);
      if (vv > 0.0) vv_.push_back(vv);
      if (uv > 0.0) uv_.push_back(uv);
    }
    max_uu_ = uu_.empty() ? 0.0 : *std::max_element(uu_.begin(), uu_.end());
    max_vv_ = vv_.empty() ? 0.0 : *std::max_element(vv_.begin(), vv_.end());
    max_uv_ = uv_.empty() ? 0.0 : *std::max_element(uv_.begin(), uv_.end());
  }

  double a1() const { return a1_; }
  double a2() const { return a2_; }

  // largest log-scale that keeps every exponent under the cap
  double max_log_t() const { return std::log(std::min(kScaleMax, kOverflowCap / max_uu_)); }
  double max_log_s() const { return std::log(std::min(kScaleMax, kOverflowCap / max_vv_)); }
  bool admissible(double lt, double ls) const {
    return lt <= max_log_t() && ls <= max_log_s() &&
           std::exp(0.5 * (lt + ls)) * max_uv_ <= kOverflowCap;
  }

  struct Eval {
    double f1, f2;
    double j11, j12, j21, j22;  // derivatives in (log t, log s)
  };

  Eval eval(double lt, double ls) const {
    const double t = std::exp(lt);
    const double s = std::exp(ls);
    const double w = std::exp(0.5 * (lt + ls));
    double p1 = 0.0, dp1 = 0.0, p2 = 0.0, dp2 = 0.0, c = 0.0, dc = 0.0;
    for (double x : uu_) {
      const double em = expm1_capped(t * x);
      p1 += x * em;
      dp1 += x * x * (em + 1.0);
    }
    for (double y : vv_) {
      const double em = expm1_capped(s * y);
      p2 += y * em;
      dp2 += y * y * (em + 1.0);
    }
    for (double z : uv_) {
      const double em = expm1_capped(w * z);
      c += z * em;
      dc += z * z * (em + 1.0);
    }
    p1 *= h2_; dp1 *= h2_; p2 *= h2_; dp2 *= h2_; c *= h2_; dc *= h2_;
    const double r12 = std::exp(0.5 * (ls - lt));  // sqrt(s/t)
    const double r21 = 1.0 / r12;
    const double bc = p_.beta * c;
    const double bdc = p_.beta * dc * w * 0.5;
    Eval e;
    e.f1 = a1_ - p_.mu1 * p1 - r12 * bc;
    e.f2 = a2_ - p_.mu2 * p2 - r21 * bc;
    e.j11 = -p_.mu1 * t * dp1 - r12 * (-0.5 * bc + bdc);
    e.j12 = -r12 * (0.5 * bc + bdc);
    e.j21 = -r21 * (0.5 * bc + bdc);
    e.j22 = -p_.mu2 * s * dp2 - r21 * (-0.5 * bc + bdc);
    return e;
  }

  double merit(const Eval& e) const { return std::max(std::fabs(e.f1) / a1_, std::fabs(e.f2) / a2_); }

 private:
  ModelParams p_;
  double h2_;
  double a1_ = 0.0, a2_ = 0.0;
  std::vector<double> uu_, vv_, uv_;
  double max_uu_ = 0.0, max_vv_ = 0.0, max_uv_ = 0.0;
};

// root of a decreasing function on [lo, hi] in log scale; false without a sign change
template <class Fn>
bool bisect_decreasing(Fn&& f, double lo, double hi, double& root) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo < 0.0 || fhi > 0.0) return false;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  root = 0.5 * (lo + hi);
  return true;
}

}  // namespace

FiberCoords project_m_beta(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "project_m_beta");
  require_on_grid(grid, v, "project_m_beta");
  if (max_abs(u) == 0.0 || max_abs(v) == 0.0) {
    throw DomainError("project_m_beta: both components must be nonzero");
  }
  const ScalingSystem sys(grid, p, u, v);
  const double lmin = std::log(kScaleMin);

  // decoupled fiber roots are the natural start; exact at beta = 0
  double lt = std::log(fiber_root_scalar(grid, p.lambda1, p.mu1, u));
  double ls = std::log(fiber_root_scalar(grid, p.lambda2, p.mu2, v));
  if (!sys.admissible(lt, ls)) {
    lt = std::min(lt, sys.max_log_t() - 1.0);
    ls = std::min(ls, sys.max_log_s() - 1.0);
  }
  auto e = sys.eval(lt, ls);
  double merit = sys.merit(e);

  for (int it = 0; it < 100 && merit > 1e-13; ++it) {
    const double det = e.j11 * e.j22 - e.j12 * e.j21;
    if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) break;
    const double dt = (-e.f1 * e.j22 + e.f2 * e.j12) / det;
    const double ds = (-e.f2 * e.j11 + e.f1 * e.j21) / det;
    bool moved = false;
    for (double damp = 1.0; damp > 1e-6; damp *= 0.5) {
      const double nt = std::clamp(lt + damp * dt, lmin, sys.max_log_t());
      const double ns = std::clamp(ls + damp * ds, lmin, sys.max_log_s());
      if (!sys.admissible(nt, ns)) continue;
      const auto ne = sys.eval(nt, ns);
      const double nm = sys.merit(ne);
      if (nm < merit) {
        lt = nt;
        ls = ns;
        e = ne;
        merit = nm;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (merit <= kProjectionTol) return {std::exp(lt), std::exp(ls)};

  // Fallback: alternate one-dimensional solves. For beta >= 0 each F_i is
  // decreasing in its own log-scale, so bisection is safe.
  for (int round = 0; round < 50; ++round) {
    const double ls_now = ls;
    auto f1 = [&](double x) {
      if (!sys.admissible(x, ls_now)) return -std::numeric_limits<double>::infinity();
      return sys.eval(x, ls_now).f1;
    };
    double root = lt;
    if (!bisect_decreasing(f1, lmin, sys.max_log_t(), root)) break;
    lt = root;
    const double lt_now = lt;
    auto f2 = [&](double x) {
      if (!sys.admissible(lt_now, x)) return -std::numeric_limits<double>::infinity();
      return sys.eval(lt_now, x).f2;
    };
    if (!bisect_decreasing(f2, lmin, sys.max_log_s(), root)) break;
    ls = root;
    merit = sys.merit(sys.eval(lt, ls));
    if (merit <= kProjectionTol) return {std::exp(lt), std::exp(ls)};
  }
  throw ProjectionError("project_m_beta: no scaling satisfies both constraints", merit, 150);
}

// ---------------------------------------------------------------------------
// diagonal fiber

double fiber_root_diag(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "fiber_root_diag");
  require_on_grid(grid, v, "fiber_root_diag");
  if (!(p.beta > 0.0)) throw HypothesisError("fiber_root_diag: beta must be positive");
  const double q = quadratic_part(grid, u, p.lambda1) + quadratic_part(grid, v, p.lambda2);
  if (!(q > 0.0)) throw HypothesisError("fiber_root_diag: quadratic part must be positive");
  const double h2 = grid.h() * grid.h();

  // 2 f'(t) = Q - mu1 P_u(t) - mu2 P_v(t) - 2 beta C(t), strictly decreasing
  auto slope = [&](double t, double* deriv) {
    double s = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double uu = u[k] * u[k];
      const double vv = v[k] * v[k];
      const double uv = std::fabs(u[k] * v[k]);
      const double eu = expm1_capped(t * uu);
      const double ev = expm1_capped(t * vv);
      const double ec = expm1_capped(t * uv);
      s += p.mu1 * uu * eu + p.mu2 * vv * ev + 2.0 * p.beta * uv * ec;
      d += p.mu1 * uu * uu * (eu + 1.0) + p.mu2 * vv * vv * (ev + 1.0) + 2.0 * p.beta * uv * uv * (ec + 1.0);
    }
    if (deriv != nullptr) *deriv = -d * h2;
    return q - s * h2;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (slope(hi, nullptr) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  if (lo == 0.0) {
    while (slope(0.5 * hi, nullptr) <= 0.0 && hi > 1e-300) hi *= 0.5;
    lo = 0.5 * hi;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid, nullptr) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    double d = 0.0;
    const double r = slope(t, &d);
    if (std::fabs(r) <= 1e-14 * q) break;
    (r > 0.0 ? lo : hi) = t;
    double next = t - r / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

// ---------------------------------------------------------------------------
// positive-part functional

namespace {
Field positive_part(Field f) {
  for (double& x : f) x = std::max(x, 0.0);
  return f;
}
}  // namespace

double energy_tilde(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "energy_tilde");
  require_on_grid(grid, v, "energy_tilde");
  const Field up = positive_part(u);
  const Field vp = positive_part(v);
  double pot = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) pot += h_val(p, up[k], vp[k]);
  return 0.5 * (quadratic_part(grid, u, p.lambda1) + quadratic_part(grid, v, p.lambda2)) -
         pot * grid.h() * grid.h();
}

FieldPair grad_tilde(const Grid& grid, const ModelParams& p, const Field& u, const Field& v) {
  require_on_grid(grid, u, "grad_tilde");
  require_on_grid(grid, v, "grad_tilde");
  FieldPair g{neg_laplacian_apply(grid, u), neg_laplacian_apply(grid, v)};
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto hg = h_grad(p, std::max(u[k], 0.0), std::max(v[k], 0.0));
    g.u[k] += p.lambda1 * u[k] - hg.hx;
    g.v[k] += p.lambda2 * v[k] - hg.hy;
  }
  return g;
}

// ---------------------------------------------------------------------------
// shared descent

namespace detail {

double l2_norm(const Grid& grid, const Field& f) { return std::sqrt(l2_inner(grid, f, f)); }

double relative_residual(const Grid& grid, const Field& u, const Field& g) {
  const double scale = l2_norm(grid, neg_laplacian_apply(grid, u));
  return scale > 0.0 ? l2_norm(grid, g) / scale : l2_norm(grid, g);
}

double h1_distance(const Grid& grid, const FieldPair& x, const Field& a, const Field& b) {
  return std::sqrt(dirichlet_energy(grid, x.u - a) + dirichlet_energy(grid, x.v - b));
}

namespace {
constexpr PoissonOptions kDirectionSolve{1e-6, 2000};

double pair_residual(const Grid& grid, const FieldPair& x, const FieldPair& g) {
  const double num = l2_inner(grid, g.u, g.u) + l2_inner(grid, g.v, g.v);
  const Field lu = neg_laplacian_apply(grid, x.u);
  const Field lv = neg_laplacian_apply(grid, x.v);
  const double den = l2_inner(grid, lu, lu) + l2_inner(grid, lv, lv);
  return std::sqrt(num / den);
}
}  // namespace

PairDescentResult descend_pair(const Grid& grid, FieldPair state, const PairProblem& problem,
                               const SystemOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("solver tolerance must be positive");
  double j = problem.energy(state);
  double tau = 1.0;
  double rel = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opts.max_iter; ++it) {
    const FieldPair g = problem.residual(state);
    rel = pair_residual(grid, state, g);
    if (rel <= opts.tol) return {std::move(state), it, rel};

    const FieldPair dir = problem.direction ? problem.direction(state) : g;
    Field du = poisson_solve(grid, dir.u, kDirectionSolve);
    Field dv = poisson_solve(grid, dir.v, kDirectionSolve);
    const double dnorm2 = dirichlet_energy(grid, du) + dirichlet_energy(grid, dv);
    const double scale = dirichlet_energy(grid, state.u) + dirichlet_energy(grid, state.v);
    // below this the Armijo decrease is lost in the rounding of the energy sum
    const double floor = static_cast<double>(grid.size()) * std::numeric_limits<double>::epsilon() *
                         (scale + std::fabs(j));
    const bool resolved = 1e-4 * dnorm2 > floor;

    bool accepted = false;
    for (int ls = 0; ls < 40 && !accepted; ++ls, tau *= 0.5) {
      FieldPair trial{state.u, state.v};
      trial.u.axpy(-tau, du);
      trial.v.axpy(-tau, dv);
      double jt = 0.0;
      try {
        trial = problem.project(std::move(trial));
        jt = problem.energy(trial);
      } catch (const OverflowError&) {
        continue;
      } catch (const ProjectionError&) {
        continue;
      }
      bool ok = false;
      if (resolved) {
        ok = jt <= j - 1e-4 * tau * dnorm2;
      } else {
        ok = pair_residual(grid, trial, problem.residual(trial)) < rel;
      }
      if (ok) {
        state = std::move(trial);
        j = jt;
        accepted = true;
        if (problem.on_accept) problem.on_accept(state);
      }
    }
    if (!accepted) throw SolverError("pair descent: line search failed", rel, it);
    tau = std::min(4.0 * tau, 1.0);  // undo the final halving, then allow growth
  }
  throw SolverError("pair descent did not converge", rel, opts.max_iter);
}

void require_seeds(const Grid& grid, const Seeds& seeds) {
  require_on_grid(grid, seeds.first.u, "seeds");
  require_on_grid(grid, seeds.second.u, "seeds");
  if (!(seeds.lambda_domain > 0.0)) throw DomainError("seeds: principal eigenvalue must be positive");
}

void fill_diagnostics(const Grid& grid, SystemSolution& sol) {
  const ModelParams& p = sol.params;
  sol.level = energy(grid, p, sol.u, sol.v);
  const auto g = energy_grad(grid, p, sol.u, sol.v);
  sol.pde_residuals = {relative_residual(grid, sol.u, g.u), relative_residual(grid, sol.v, g.v)};
  const auto c = constraints_g(grid, p, sol.u, sol.v);
  sol.constraint_residuals = {std::fabs(c[0]) / quadratic_part(grid, sol.u, p.lambda1),
                              std::fabs(c[1]) / quadratic_part(grid, sol.v, p.lambda2)};
  sol.det_j = matrix_j(grid, p, sol.u, sol.v).det();
  sol.det_bound = det_lower_bound(grid, p, sol.u, sol.v);
}

void add(SystemSolution& sol, std::string name, bool passed, double value, double bound) {
  sol.certificates.push_back({std::move(name), passed, value, bound});
}

}  // namespace detail
}  // namespace mosersys
