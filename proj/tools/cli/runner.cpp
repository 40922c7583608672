#include "cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include "json.hpp"
#include "mosersys/constants.hpp"
#include "mosersys/errors.hpp"
#include "mosersys/scalar.hpp"
#include "mosersys/system.hpp"

namespace mosersys::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int classify(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return kExitValidation;
  return kExitNonConvergence;
}

double rel_gap(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

double grad_norm(const Grid& grid, const Field& f) { return std::sqrt(dirichlet_energy(grid, f)); }

double distance_to_seeds(const Grid& grid, const SystemSolution& sol, const Seeds& seeds) {
  return std::sqrt(dirichlet_energy(grid, sol.u - seeds.first.u) +
                   dirichlet_energy(grid, sol.v - seeds.second.u));
}

struct Setup {
  Grid grid;
  Eigenpair eig;
  Seeds seeds;
};

// Scaling factors for the beta_units setting.
struct BetaScales {
  double beta_max = 0.0;   // min{beta1, beta2, sqrt(mu1 mu2)}
  double beta_bar0 = 0.0;  // 4 max{E1 beta5, E2 beta6} / min{E1, E2}
};

BetaScales beta_scales(const Setup& s, const ModelParams& p) {
  const auto& g1 = s.seeds.first;
  const auto& g2 = s.seeds.second;
  BetaScales out;
  out.beta_max = std::min({cross_threshold(s.grid, g1, g2.u), cross_threshold(s.grid, g2, g1.u),
                           p.sqrt_mu1mu2()});
  const double b5 = quartic_threshold(s.grid, g1);
  const double b6 = quartic_threshold(s.grid, g2);
  out.beta_bar0 = 4.0 * std::max(g1.energy * b5, g2.energy * b6) / std::min(g1.energy, g2.energy);
  return out;
}

double resolve_beta(double value, BetaUnits units, const BetaScales& scales, const ModelParams& p) {
  switch (units) {
    case BetaUnits::Absolute: return value;
    case BetaUnits::SqrtMu: return value * p.sqrt_mu1mu2();
    case BetaUnits::BetaMax: return value * scales.beta_max;
    case BetaUnits::BetaBar0: return value * scales.beta_bar0;
  }
  return value;
}

json config_json(const RunConfig& c) {
  json j;
  j["domain"] = {{"shape", to_string(c.shape)}, {"n", c.n}};
  j["params"] = {{"lambda1", c.params.lambda1}, {"lambda2", c.params.lambda2}, {"mu1", c.params.mu1},
                 {"mu2", c.params.mu2},         {"beta", c.params.beta},       {"beta_units", to_string(c.beta_units)}};
  j["run"] = {{"regime", to_string(c.kind)}, {"write_fields", c.write_fields}};
  if (c.kind == RunKind::Sweep) j["sweep"] = {{"betas", c.beta_list}, {"workers", c.workers}};
  j["solver"] = {{"tol", c.scalar.tol}, {"max_iter", c.scalar.max_iter}, {"restarts", c.scalar.restarts},
                 {"seed", c.scalar.seed}};
  j["system"] = {{"tol", c.system.tol},
                 {"max_iter", c.system.max_iter},
                 {"beta_negative_cap", c.system.beta_negative_cap},
                 {"trust_radius", c.system.trust_radius},
                 {"level_grid_points", c.system.level_grid_points}};
  if (c.d4pi) j["constants"] = {{"d4pi", *c.d4pi}};
  return j;
}

json ground_state_json(const GroundState& gs) {
  return {{"lambda", gs.lambda},
          {"mu", gs.mu},
          {"energy", gs.energy},
          {"nehari_residual", gs.nehari_residual},
          {"pde_residual", gs.pde_residual},
          {"stationarity", gs.stationarity},
          {"sup_norm", gs.sup_norm},
          {"grad_norm", gs.grad_norm},
          {"rho_proxy", gs.grad_norm},
          {"interior_positive", gs.interior_positive},
          {"iterations", gs.iterations},
          {"restart_index", gs.restart_index}};
}

class Run {
 public:
  Run(const RunConfig& cfg, std::ostream* log) : cfg_(cfg), log_(log), out_(cfg.output_dir) {}

  RunOutcome execute() {
    const auto start = std::chrono::steady_clock::now();
    int code = kExitOk;
    std::string message = "ok";
    try {
      dispatch();
    } catch (const std::exception& e) {
      code = classify(e);
      message = e.what();
    }
    if (code == kExitOk && worst_entry_code_ != kExitOk) {
      code = worst_entry_code_;
      message = "one or more sweep entries failed";
    }
    const bool all_passed = std::all_of(certs_.begin(), certs_.end(), [](const auto& c) { return c.passed; });
    if (code == kExitOk && !all_passed) {
      code = kExitCertificate;
      message = "certificate failure";
    }
    timings_["total"] = seconds_since(start);
    note("finished: " + message);
    write_manifest(code, message);
    RunOutcome outcome;
    outcome.exit_code = code;
    outcome.message = message;
    outcome.certificates = certs_;
    outcome.files = out_.files();
    return outcome;
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  }

  void note(const std::string& line) {
    if (log_) *log_ << "[mosersys] " << line << '\n';
  }

  void certify(const std::string& name, bool passed, double value, double bound) {
    certs_.push_back({name, passed, value, bound});
    if (!passed) note("certificate failed: " + name);
  }

  void certify_solution(const std::string& scope, const SystemSolution& sol) {
    for (const auto& c : sol.certificates) certify(scope + "/" + c.name, c.passed, c.value, c.bound);
  }

  Setup prepare() {
    const auto t0 = std::chrono::steady_clock::now();
    cfg_.params.validate();
    Setup s{build_domain(cfg_.shape, cfg_.n), {}, {}};
    s.eig = principal_eigenpair(s.grid);
    cfg_.params.require_admissible(s.eig.lambda1);
    note("grid " + std::string(to_string(cfg_.shape)) + " n=" + std::to_string(cfg_.n) +
         ", Lambda1 = " + format_number(s.eig.lambda1));
    const auto& p = cfg_.params;
    s.seeds.lambda_domain = s.eig.lambda1;
    s.seeds.first = solve_scalar_ground_state(s.grid, s.eig, p.lambda1, p.mu1, cfg_.scalar);
    if (p.lambda1 == p.lambda2 && p.mu1 == p.mu2) {
      s.seeds.second = s.seeds.first;
    } else {
      s.seeds.second = solve_scalar_ground_state(s.grid, s.eig, p.lambda2, p.mu2, cfg_.scalar);
    }
    note("scalar levels E1 = " + format_number(s.seeds.first.energy) +
         ", E2 = " + format_number(s.seeds.second.energy));
    timings_["setup"] = seconds_since(t0);
    return s;
  }

  void dispatch() {
    switch (cfg_.kind) {
      case RunKind::Scalar: return run_scalar();
      case RunKind::SmallBeta:
      case RunKind::LargeBeta:
      case RunKind::NegativeBeta: return run_single();
      case RunKind::Constants: return run_constants();
      case RunKind::Inequalities: return run_inequalities();
      case RunKind::Sweep: return run_sweep();
    }
  }

  // -------------------------------------------------------------------------

  void certify_ground_state(const std::string& scope, const Grid& grid, const GroundState& gs) {
    const double nl = gs.mu * nehari_nonlinear(grid, gs.u);
    certify(scope + "/energy_in_band", gs.energy > 0.0 && gs.energy < kTwoPi, gs.energy, kTwoPi);
    certify(scope + "/nehari_residual", gs.nehari_residual <= 1e-9, gs.nehari_residual, 1e-9);
    certify(scope + "/pde_residual", gs.pde_residual <= cfg_.scalar.tol, gs.pde_residual, cfg_.scalar.tol);
    certify(scope + "/energy_above_quarter", gs.energy > 0.25 * nl * (1.0 - 1e-9), gs.energy, 0.25 * nl);
    certify(scope + "/energy_below_half", gs.energy < 0.5 * nl * (1.0 + 1e-9), gs.energy, 0.5 * nl);
    certify(scope + "/interior_positive", gs.interior_positive, min_value(gs.u), 0.0);
  }

  void run_scalar() {
    const Setup s = prepare();
    json report;
    report["config"] = config_json(cfg_);
    report["lambda1_domain"] = s.eig.lambda1;
    report["first"] = ground_state_json(s.seeds.first);
    certify_ground_state("scalar/first", s.grid, s.seeds.first);
    if (cfg_.write_fields) out_.write_field("u1.csv", s.grid, s.seeds.first.u);
    const bool distinct = !(cfg_.params.lambda1 == cfg_.params.lambda2 && cfg_.params.mu1 == cfg_.params.mu2);
    if (distinct) {
      report["second"] = ground_state_json(s.seeds.second);
      certify_ground_state("scalar/second", s.grid, s.seeds.second);
      if (cfg_.write_fields) out_.write_field("u2.csv", s.grid, s.seeds.second.u);
    }
    write_report(std::move(report));
  }

  // -------------------------------------------------------------------------

  SystemSolution solve(const Setup& s, const ModelParams& p, RunKind kind) const {
    switch (kind) {
      case RunKind::SmallBeta: return solve_small_beta(s.grid, p, s.seeds, cfg_.system);
      case RunKind::LargeBeta: return solve_large_beta(s.grid, p, s.seeds, cfg_.system);
      case RunKind::NegativeBeta: return solve_negative_beta(s.grid, p, s.seeds, cfg_.system);
      default: throw ConfigError("not a system regime");
    }
  }

  // I - (1/p)<I'(u,v),(u,v)> - (p-2)/(2p) Q against K_p, and K_p >= 0 when beta > 0
  void certify_identity(const std::string& scope, const Grid& grid, const SystemSolution& sol) {
    const auto& p = sol.params;
    const double level = energy(grid, p, sol.u, sol.v);
    const auto gc = constraints_g(grid, p, sol.u, sol.v);
    const double q = quadratic_part(grid, sol.u, p.lambda1) + quadratic_part(grid, sol.v, p.lambda2);
    for (int pe : {2, 3, 4}) {
      const double lhs = level - (gc[0] + gc[1]) / pe - (pe - 2.0) / (2.0 * pe) * q;
      const double kp = k_p(grid, p, sol.u, sol.v, pe);
      const double err = std::fabs(lhs - kp) / std::max(std::fabs(level), 1e-300);
      certify(scope + "/identity_p" + std::to_string(pe), err <= 1e-10, err, 1e-10);
      if (p.beta > 0.0) {
        certify(scope + "/kp_nonnegative_p" + std::to_string(pe), kp >= -1e-12 * std::fabs(level), kp, 0.0);
      }
    }
  }

  json solution_json(const Grid& grid, const SystemSolution& sol, const Seeds& seeds) const {
    json j;
    j["regime"] = to_string(sol.regime);
    j["beta"] = sol.params.beta;
    j["level"] = sol.level;
    j["initial_level"] = sol.initial_level;
    j["iterations"] = sol.iterations;
    j["constraint_residuals"] = sol.constraint_residuals;
    j["pde_residuals"] = sol.pde_residuals;
    j["det_j"] = sol.det_j;
    j["det_bound"] = sol.det_bound;
    j["grad_norm_u"] = grad_norm(grid, sol.u);
    j["grad_norm_v"] = grad_norm(grid, sol.v);
    j["mass_u"] = lp_integral(grid, sol.u, 2.0);
    j["mass_v"] = lp_integral(grid, sol.v, 2.0);
    j["distance_to_seeds"] = distance_to_seeds(grid, sol, seeds);
    j["scalar_level_sum"] = seeds.first.energy + seeds.second.energy;
    json certs = json::array();
    for (const auto& c : sol.certificates) {
      certs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
    }
    j["certificates"] = std::move(certs);
    return j;
  }

  void run_single() {
    const Setup s = prepare();
    const auto scales = beta_scales(s, cfg_.params);
    ModelParams p = cfg_.params;
    p.beta = resolve_beta(cfg_.params.beta, cfg_.beta_units, scales, p);
    note("solving " + std::string(to_string(cfg_.kind)) + " at beta = " + format_number(p.beta));
    const auto t0 = std::chrono::steady_clock::now();
    const SystemSolution sol = solve(s, p, cfg_.kind);
    timings_["solve"] = seconds_since(t0);
    const std::string scope(to_string(cfg_.kind));
    certify_solution(scope, sol);
    certify_identity(scope, s.grid, sol);

    json report;
    report["config"] = config_json(cfg_);
    report["lambda1_domain"] = s.eig.lambda1;
    report["beta_max"] = scales.beta_max;
    report["beta_bar0"] = scales.beta_bar0;
    report["seeds"] = {{"first", ground_state_json(s.seeds.first)}, {"second", ground_state_json(s.seeds.second)}};
    report["solution"] = solution_json(s.grid, sol, s.seeds);
    if (cfg_.write_fields) {
      out_.write_field("u.csv", s.grid, sol.u);
      out_.write_field("v.csv", s.grid, sol.v);
    }
    write_report(std::move(report));
  }

  // -------------------------------------------------------------------------

  void run_constants() {
    const Setup s = prepare();
    const auto& p = cfg_.params;
    const auto t0 = std::chrono::steady_clock::now();
    const auto sob = best_sobolev_s4(s.grid);
    const ThresholdReport r = build_threshold_report(s.grid, p, s.seeds.first, s.seeds.second, s.eig.lambda1,
                                                     sob.s4, cfg_.d4pi, cfg_.profile_grid_n, cfg_.family_level);
    timings_["constants"] = seconds_since(t0);
    const auto& b = r.betas;

    const double all_betas[] = {b.beta1, b.beta2, b.beta3, b.beta4, b.beta5, b.beta6, b.beta_bar0};
    const double smallest = *std::min_element(std::begin(all_betas), std::end(all_betas));
    const bool finite = std::all_of(std::begin(all_betas), std::end(all_betas), [](double x) { return std::isfinite(x); });
    certify("constants/thresholds_positive", finite && smallest > 0.0, smallest, 0.0);
    certify("constants/energies_in_band", r.energies_in_band, std::max(r.e1, r.e2), kTwoPi);
    certify("constants/first_energy_lower_band", r.e1 >= r.e1_band * 0.98, r.e1, r.e1_band);
    certify("constants/second_energy_lower_band", r.e2 >= r.e2_band * 0.98, r.e2, r.e2_band);
    const double b1_floor = std::sqrt(p.mu1 * p.mu2 * r.e1 / (4.0 * r.e2));
    const double b2_floor = std::sqrt(p.mu1 * p.mu2 * r.e2 / (4.0 * r.e1));
    certify("constants/beta1_above_energy_ratio_bound", b.beta1 > b1_floor, b.beta1, b1_floor);
    certify("constants/beta2_above_energy_ratio_bound", b.beta2 > b2_floor, b.beta2, b2_floor);
    certify("constants/d4pi_lower_bound_positive", r.d4pi.best > 0.0, r.d4pi.best, 0.0);
    const bool symmetric = p.lambda1 == p.lambda2 && p.mu1 == p.mu2;
    if (symmetric) {
      certify("constants/symmetric_beta1_equals_beta5", rel_gap(b.beta1, b.beta5) <= 1e-12, b.beta1, b.beta5);
      certify("constants/symmetric_beta2_equals_beta6", rel_gap(b.beta2, b.beta6) <= 1e-12, b.beta2, b.beta6);
      certify("constants/symmetric_beta_bar0_equals_4beta5", rel_gap(b.beta_bar0, 4.0 * b.beta5) <= 1e-12,
              b.beta_bar0, 4.0 * b.beta5);
    }
    if (r.d4pi_from_config) {
      const double lo = std::min({b.beta1, b.beta2, b.beta3, b.beta4});
      certify("constants/betas_exceed_beta_star_formula", lo > r.beta_star_formula, lo, r.beta_star_formula);
    }

    json report;
    report["config"] = config_json(cfg_);
    report["lambda1_domain"] = r.lambda1_domain;
    report["s4"] = r.s4;
    report["s4_stationarity"] = sob.stationarity;
    report["e1"] = r.e1;
    report["e2"] = r.e2;
    report["e1_lower_band"] = r.e1_band;
    report["e2_lower_band"] = r.e2_band;
    report["energies_in_band"] = r.energies_in_band;
    report["betas"] = {{"beta1", b.beta1}, {"beta2", b.beta2}, {"beta3", b.beta3}, {"beta4", b.beta4},
                       {"beta5", b.beta5}, {"beta6", b.beta6}, {"beta_bar0", b.beta_bar0}};
    report["small_range"] = {
        {"upper", std::min(b.small_range(), p.sqrt_mu1mu2())},
        {"caveat", "the existence result also needs beta below a non-constructive limit; this range is necessary, "
                   "not sufficient"}};
    report["d4pi"] = {{"trial_lower_bound", r.d4pi.trial},
                      {"rearranged_lower_bound", r.d4pi.rearranged},
                      {"best_lower_bound", r.d4pi.best},
                      {"trial_radius", r.d4pi.radius},
                      {"trial_rho", r.d4pi.rho},
                      {"configured", r.d4pi_config ? json(*r.d4pi_config) : json(nullptr)},
                      {"used", r.d4pi_used},
                      {"source", r.d4pi_from_config ? "config" : "computed lower bound"}};
    report["beta_star_formula"] = {
        {"value", r.beta_star_formula},
        {"certified", r.d4pi_from_config},
        {"note", r.d4pi_from_config
                     ? "evaluated at the configured d4pi; certified only if that value is an upper bound"
                     : "evaluated at a lower bound for d4pi, so this over-estimates the formula; not a certified bound"}};
    std::string csv = "gamma,c_gamma\n";
    json table = json::array();
    for (const auto& [gamma, c] : r.c_gamma_table) {
      csv += format_number(gamma) + "," + format_number(c) + "\n";
      table.push_back({gamma, c});
    }
    report["c_gamma"] = std::move(table);
    out_.write_text("c_gamma.csv", csv);
    write_report(std::move(report));
  }

  // -------------------------------------------------------------------------

  void run_inequalities() {
    const auto& p = cfg_.params;
    p.validate();
    std::mt19937_64 rng(cfg_.scalar.seed);
    auto draw = [&] { return 6.0 * (1.0 - unit_uniform(rng())); };  // (0, 6]

    ModelParams coupled = p;
    if (!(coupled.beta > 0.0)) coupled.beta = 0.5 * p.sqrt_mu1mu2();
    long v_prod = 0, v_rem = 0, v_sec = 0, v_euler = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (long k = 0; k < cfg_.inequality_samples; ++k) {
      const double x = draw();
      const double y = draw();
      const auto c = check_exponential_bounds(x, y);
      v_prod += !c.product_bound;
      v_rem += !c.remainder_bound;
      v_sec += !c.secant_bound;
      v_euler += !check_euler_bound(coupled, x, y);
    }
    const double t_pointwise = seconds_since(t0);
    timings_["pointwise_inequalities"] = t_pointwise;
    certify("inequalities/product_bound_violations", v_prod == 0, static_cast<double>(v_prod), 0.0);
    certify("inequalities/remainder_bound_violations", v_rem == 0, static_cast<double>(v_rem), 0.0);
    certify("inequalities/secant_bound_violations", v_sec == 0, static_cast<double>(v_sec), 0.0);
    certify("inequalities/euler_bound_violations", v_euler == 0, static_cast<double>(v_euler), 0.0);

    // subcritical L^4 control on normalised fields
    const Grid grid = build_domain(cfg_.shape, cfg_.n);
    const Eigenpair eig = principal_eigenpair(grid);
    const double gammas[] = {1.0, std::numbers::pi, 2.0 * std::numbers::pi, 3.5 * std::numbers::pi};
    long v_l4 = 0;
    double worst_ratio = 0.0;
    for (int i = 0; i < cfg_.integral_fields; ++i) {
      Field u = perturbed_start(grid, eig.phi, cfg_.scalar.seed, i, 0.9);
      u *= 1.0 / grad_norm(grid, u);
      for (double gamma : gammas) {
        const auto c = check_integral_bound(grid, u, gamma);
        v_l4 += !c.holds;
        worst_ratio = std::max(worst_ratio, c.lhs / c.rhs);
      }
    }
    certify("inequalities/l4_control_violations", v_l4 == 0, static_cast<double>(v_l4), 0.0);

    const double alphas[] = {std::numbers::pi, 2.0 * std::numbers::pi, 4.0 * std::numbers::pi,
                             4.5 * std::numbers::pi};
    json moser = json::array();
    double previous = 0.0;
    bool monotone = true;
    bool finite = true;
    for (double alpha : alphas) {
      const auto m = moser_sup_check(grid, alpha, cfg_.moser_trials);
      monotone = monotone && m.sup_estimate >= previous;
      previous = m.sup_estimate;
      if (alpha <= 4.0 * std::numbers::pi) finite = finite && std::isfinite(m.sup_estimate);
      moser.push_back({{"alpha", alpha},
                       {"sup_estimate", m.sup_estimate},
                       {"divergence_witness", m.divergence_witness},
                       {"resolution_limited", m.resolution_limited},
                       {"trial_values", m.trial_values},
                       {"plateau_radii", m.plateau_radii}});
    }
    certify("inequalities/moser_finite_up_to_critical", finite, previous, 0.0);
    certify("inequalities/moser_monotone_in_alpha", monotone, previous, 0.0);

    json report;
    report["config"] = config_json(cfg_);
    report["samples"] = cfg_.inequality_samples;
    report["coupling_beta"] = coupled.beta;
    report["violations"] = {{"product_bound", v_prod},
                            {"remainder_bound", v_rem},
                            {"secant_bound", v_sec},
                            {"euler_bound", v_euler},
                            {"l4_control", v_l4}};
    report["l4_control_fields"] = cfg_.integral_fields;
    report["l4_control_worst_ratio"] = worst_ratio;
    report["moser"] = std::move(moser);
    write_report(std::move(report));
  }

  // -------------------------------------------------------------------------

  struct SweepEntry {
    double beta = 0.0;
    RunKind kind = RunKind::SmallBeta;
    std::optional<SystemSolution> sol;
    int error_code = kExitOk;
    std::string error;
  };

  RunKind pick_solver(double beta, const BetaScales& scales) const {
    switch (cfg_.sweep_solver) {
      case SweepSolver::SmallBeta: return RunKind::SmallBeta;
      case SweepSolver::LargeBeta: return RunKind::LargeBeta;
      case SweepSolver::NegativeBeta: return RunKind::NegativeBeta;
      case SweepSolver::Auto: break;
    }
    if (beta == 0.0) throw ConfigError("sweep: beta = 0 is the uncoupled problem; use the scalar regime");
    if (beta < 0.0) return RunKind::NegativeBeta;
    return beta < scales.beta_max ? RunKind::SmallBeta : RunKind::LargeBeta;
  }

  // Solves every entry on a pool of workers; results land in their own slot so
  // the collector sees them in configuration order.
  void solve_entries(const Setup& s, std::vector<SweepEntry>& entries) const {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < entries.size(); k = next++) {
        auto& e = entries[k];
        ModelParams p = cfg_.params;
        p.beta = e.beta;
        try {
          e.sol = solve(s, p, e.kind);
        } catch (const std::exception& ex) {
          e.error_code = classify(ex);
          e.error = ex.what();
        }
      }
    };
    const int n_workers = std::min<int>(cfg_.workers, static_cast<int>(entries.size()));
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  static std::string flag(const SystemSolution& sol, const char* name) {
    const Certificate* c = sol.find(name);
    return c ? (c->passed ? "1" : "0") : "";
  }

  static const char* ordering_certificate(RunKind kind) {
    switch (kind) {
      case RunKind::SmallBeta: return "level_below_scalar_sum";
      case RunKind::LargeBeta: return "level_below_min_scalar";
      default: return "level_below_box_max";
    }
  }

  void certify_trends(const Setup& s, const std::vector<SweepEntry>& entries) {
    const double e_sum = s.seeds.first.energy + s.seeds.second.energy;
    for (RunKind kind : {RunKind::SmallBeta, RunKind::LargeBeta, RunKind::NegativeBeta}) {
      std::vector<const SweepEntry*> group;
      for (const auto& e : entries) {
        if (e.kind == kind && e.sol) group.push_back(&e);
      }
      if (group.size() < 2) continue;
      // order by |beta| from the largest down, i.e. towards the uncoupled limit
      std::sort(group.begin(), group.end(),
                [](const SweepEntry* a, const SweepEntry* b) { return std::fabs(a->beta) > std::fabs(b->beta); });
      const std::string scope = "sweep/" + std::string(to_string(kind));
      if (kind == RunKind::LargeBeta) {
        bool level_ok = true;
        bool grad_ok = true;
        for (std::size_t i = 1; i < group.size(); ++i) {
          const auto& hi = *group[i - 1]->sol;  // larger beta
          const auto& lo = *group[i]->sol;
          level_ok = level_ok && hi.level <= lo.level * (1.0 + 1e-12);
          grad_ok = grad_ok && grad_norm(s.grid, hi.u) + grad_norm(s.grid, hi.v) <
                                   grad_norm(s.grid, lo.u) + grad_norm(s.grid, lo.v);
        }
        certify(scope + "/level_non_increasing_in_beta", level_ok, group.front()->sol->level,
                group.back()->sol->level);
        certify(scope + "/gradient_norms_decreasing_in_beta", grad_ok, 0.0, 0.0);
        continue;
      }
      bool closer = true;
      for (std::size_t i = 1; i < group.size(); ++i) {
        closer = closer && distance_to_seeds(s.grid, *group[i]->sol, s.seeds) <
                               distance_to_seeds(s.grid, *group[i - 1]->sol, s.seeds);
      }
      certify(scope + "/distance_to_seeds_decreasing_as_beta_vanishes", closer,
              distance_to_seeds(s.grid, *group.back()->sol, s.seeds),
              distance_to_seeds(s.grid, *group.front()->sol, s.seeds));
      if (kind == RunKind::NegativeBeta) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto* e : group) {
          const Certificate* c = e->sol->find("level_below_box_max");
          const double slope = std::fabs(c->bound - e_sum) / std::fabs(e->beta);
          lo = std::min(lo, slope);
          hi = std::max(hi, slope);
        }
        certify(scope + "/box_gap_slope_stable", hi <= 1.2 * lo, hi / lo, 1.2);
      }
    }
  }

  void run_sweep() {
    const Setup s = prepare();
    const auto scales = beta_scales(s, cfg_.params);
    std::vector<SweepEntry> entries;
    for (double value : cfg_.beta_list) {
      SweepEntry e;
      e.beta = resolve_beta(value, cfg_.beta_units, scales, cfg_.params);
      e.kind = pick_solver(e.beta, scales);
      entries.push_back(std::move(e));
    }
    note("sweep over " + std::to_string(entries.size()) + " beta values on " + std::to_string(cfg_.workers) +
         " worker(s)");
    const auto t0 = std::chrono::steady_clock::now();
    solve_entries(s, entries);
    timings_["sweep"] = seconds_since(t0);

    std::string csv = "beta,level,grad_norm_u,grad_norm_v,cert_level_ordering,cert_det_j,iters\n";
    json rows = json::array();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      const std::string scope = "sweep[" + std::to_string(k) + "]";
      if (!e.sol) {
        note(scope + " beta = " + format_number(e.beta) + " failed: " + e.error);
        worst_entry_code_ = worst_entry_code_ == kExitOk ? e.error_code : std::min(worst_entry_code_, e.error_code);
        csv += format_number(e.beta) + ",nan,nan,nan,0," + (e.kind == RunKind::SmallBeta ? "0" : "") + ",\n";
        rows.push_back({{"beta", e.beta}, {"solver", to_string(e.kind)}, {"error", e.error}});
        continue;
      }
      const auto& sol = *e.sol;
      certify_solution(scope, sol);
      certify_identity(scope, s.grid, sol);
      csv += format_number(e.beta) + "," + format_number(sol.level) + "," + format_number(grad_norm(s.grid, sol.u)) +
             "," + format_number(grad_norm(s.grid, sol.v)) + "," + flag(sol, ordering_certificate(e.kind)) + "," +
             flag(sol, "det_j_bound_every_iterate") + "," + std::to_string(sol.iterations) + "\n";
      json row = solution_json(s.grid, sol, s.seeds);
      row["solver"] = to_string(e.kind);
      rows.push_back(std::move(row));
      if (cfg_.write_fields) {
        char name[64];
        std::snprintf(name, sizeof name, "fields/beta_%03zu", k);
        out_.write_field(std::string(name) + "_u.csv", s.grid, sol.u);
        out_.write_field(std::string(name) + "_v.csv", s.grid, sol.v);
      }
    }
    certify_trends(s, entries);
    out_.write_text("sweep.csv", csv);

    json report;
    report["config"] = config_json(cfg_);
    report["lambda1_domain"] = s.eig.lambda1;
    report["beta_max"] = scales.beta_max;
    report["beta_bar0"] = scales.beta_bar0;
    report["seeds"] = {{"first", ground_state_json(s.seeds.first)}, {"second", ground_state_json(s.seeds.second)}};
    report["entries"] = std::move(rows);
    write_report(std::move(report));
  }

  // -------------------------------------------------------------------------

  void write_report(json report) {
    json certs = json::array();
    for (const auto& c : certs_) {
      certs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
    }
    report["certificates"] = std::move(certs);
    out_.write_text("report.json", report.dump(2) + "\n");
  }

  void write_manifest(int code, const std::string& message) {
    json m;
    m["tool"] = "mosersys";
    m["exit_code"] = code;
    m["message"] = message;
    m["config"] = config_json(cfg_);
    json files = json::array();
    for (const auto& f : out_.files()) {
      char crc[16];
      std::snprintf(crc, sizeof crc, "%08x", f.crc32);
      files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"crc32", crc}});
    }
    m["files"] = std::move(files);
    json certs = json::array();
    for (const auto& c : certs_) {
      certs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
    }
    m["certificates"] = std::move(certs);
    m["all_certificates_passed"] =
        std::all_of(certs_.begin(), certs_.end(), [](const auto& c) { return c.passed; });
    m["timings_seconds"] = timings_;
    try {
      out_.write_text("manifest.json", m.dump(2) + "\n");
    } catch (const std::exception& e) {
      note(std::string("could not write manifest: ") + e.what());
    }
  }

  const RunConfig& cfg_;
  std::ostream* log_;
  ArtifactWriter out_;
  std::vector<CertificateRecord> certs_;
  json timings_ = json::object();
  int worst_entry_code_ = kExitOk;
};

}  // namespace

RunOutcome run(const RunConfig& config, std::ostream* log) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    return {kExitValidation, e.what(), {}, {}};
  }
  try {
    Run r(config, log);
    return r.execute();
  } catch (const std::exception& e) {
    // the output directory itself could not be created
    return {kExitValidation, e.what(), {}, {}};
  }
}

}  // namespace mosersys::cli
