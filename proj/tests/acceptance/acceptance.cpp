// Runs the acceptance criteria and prints one [PASS]/[FAIL] line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/runner.hpp"
#include "mosersys/constants.hpp"
#include "mosersys/errors.hpp"
#include "mosersys/system.hpp"
#include "oracles.hpp"

using namespace mosersys;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [violated: " << what << "]";
    }
  }
};

SolverOptions plain() {
  SolverOptions o;
  o.restarts = 0;
  return o;
}

struct Problem {
  Grid grid;
  Seeds seeds;
  ModelParams params;
};

Problem square_problem(int n) {
  Grid g = build_domain(Shape::UnitSquare, n);
  const Eigenpair eig = principal_eigenpair(g);
  GroundState gs = solve_scalar_ground_state(g, eig, 0.0, 1.0, plain());
  Seeds seeds{gs, gs, eig.lambda1};
  return {std::move(g), std::move(seeds), ModelParams{0.0, 0.0, 1.0, 1.0, 0.0}};
}

const Problem& square63() {
  static const Problem p = square_problem(63);
  return p;
}

ModelParams with_beta(ModelParams p, double beta) {
  p.beta = beta;
  return p;
}

double h1_distance(const Grid& g, const SystemSolution& sol, const Seeds& s) {
  return std::sqrt(dirichlet_energy(g, sol.u - s.first.u)) + std::sqrt(dirichlet_energy(g, sol.v - s.second.u));
}

double small_range(const Problem& pr) {
  const double b1 = cross_threshold(pr.grid, pr.seeds.first, pr.seeds.second.u);
  const double b2 = cross_threshold(pr.grid, pr.seeds.second, pr.seeds.first.u);
  return std::min({b1, b2, pr.params.sqrt_mu1mu2()});
}

void eigenvalues(Verdict& v) {
  auto t0 = Clock::now();
  const double square = principal_eigenpair(build_domain(Shape::UnitSquare, 127)).lambda1;
  const double ts = seconds_since(t0);
  t0 = Clock::now();
  const double disk = principal_eigenpair(build_domain(Shape::UnitDisk, 255)).lambda1;
  const double td = seconds_since(t0);
  const double exact_square = 2.0 * kPi * kPi;
  const double exact_disk = oracle::bessel_j0_first_zero_squared();
  const double es = std::fabs(square - exact_square) / exact_square;
  const double ed = std::fabs(disk - exact_disk) / exact_disk;
  v.detail << "square " << square << " (rel err " << es << ", " << ts << " s); disk " << disk << " (rel err " << ed
           << ", " << td << " s)";
  v.require(es <= 0.005, "square within 0.5%");
  v.require(ts < 1.0, "square under 1 s");
  v.require(ed <= 0.02, "disk within 2%");
  v.require(td < 5.0, "disk under 5 s");
}

void inequalities(Verdict& v) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(42);
  const ModelParams p{0.0, 0.0, 1.0, 1.0, 0.5};
  long violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = 6.0 * (1.0 - unit_uniform(rng()));
    const double y = 6.0 * (1.0 - unit_uniform(rng()));
    const auto c = check_exponential_bounds(x, y);
    violations += !c.product_bound + !c.remainder_bound + !c.secant_bound + !check_euler_bound(p, x, y);
  }
  const double pointwise_time = seconds_since(t0);

  const Grid g = build_domain(Shape::UnitSquare, 63);
  long field_violations = 0;
  for (int i = 0; i < 50; ++i) {
    Field u = oracle::random_smooth_field(g, rng);
    u *= 1.0 / std::sqrt(dirichlet_energy(g, u));
    for (double gamma : {1.0, kPi, 2.0 * kPi, 3.5 * kPi}) field_violations += !check_integral_bound(g, u, gamma).holds;
  }
  v.detail << "pointwise violations " << violations << " in " << pointwise_time << " s; integral violations "
           << field_violations << " over 200 checks";
  v.require(violations == 0, "pointwise inequalities");
  v.require(pointwise_time < 10.0, "under 10 s");
  v.require(field_violations == 0, "integral inequality");
}

void c_gamma_value(Verdict& v) {
  const double value = c_gamma(kPi) / kPi;
  const double expected = 320.0 / 9.0 * std::exp(2.0 / 3.0);
  const double rel = std::fabs(value - expected) / expected;
  v.detail << "C(pi)/pi = " << value << ", closed form " << expected << ", rel diff " << rel;
  v.require(rel <= 4.0 * std::numeric_limits<double>::epsilon(), "machine precision");
}

void scalar_ground_state(Verdict& v) {
  const auto t0 = Clock::now();
  double levels[3];
  int k = 0;
  for (int n : {63, 127, 255}) {
    const Grid g = build_domain(Shape::UnitDisk, n);
    const GroundState gs = solve_scalar_ground_state(g, 0.0, 1.0, plain());
    levels[k++] = gs.energy;
    if (n != 127) continue;
    const double nl = nehari_nonlinear(g, gs.u);
    v.detail << "E = " << gs.energy << ", Nehari residual " << gs.nehari_residual << "; ";
    v.require(gs.energy > 0.0 && gs.energy < kTwoPi, "E in (0, 2 pi)");
    v.require(gs.nehari_residual <= 1e-9, "Nehari residual");
    v.require(0.25 * nl < gs.energy && gs.energy < 0.5 * nl, "quarter/half band");
  }
  const double ratio = oracle::richardson_ratio(levels[0], levels[1], levels[2]);
  const double t = seconds_since(t0);
  v.detail << "Richardson ratio " << ratio << " (" << t << " s)";
  v.require(ratio >= 3.0 && ratio <= 5.0, "ratio in [3, 5]");
  v.require(t < 60.0, "under 60 s");
}

void small_coupling(Verdict& v) {
  const auto t0 = Clock::now();
  const Problem& pr = square63();
  const double beta = 0.1 * small_range(pr);
  const ModelParams p = with_beta(pr.params, beta);
  const SystemSolution sol = solve_small_beta(pr.grid, p, pr.seeds);
  const Grid& g = pr.grid;
  const double mass = std::min(lp_integral(g, sol.u, 2.0), lp_integral(g, sol.v, 2.0));
  const double e_sum = pr.seeds.first.energy + pr.seeds.second.energy;
  const double det = matrix_j(g, p, sol.u, sol.v).det();
  const double bound = det_lower_bound(g, p, sol.u, sol.v);
  const double scale = std::max(std::fabs(det), std::fabs(bound));

  const FieldPair gr = energy_grad(g, p, sol.u, sol.v);
  const double pairing = l2_inner(g, gr.u, sol.u) + l2_inner(g, gr.v, sol.v);
  const double q = quadratic_part(g, sol.u, p.lambda1) + quadratic_part(g, sol.v, p.lambda2);
  double worst = 0.0;
  for (double pe : {2.0, 3.0, 4.0}) {
    const double lhs = sol.level - pairing / pe - (pe - 2.0) / (2.0 * pe) * q;
    worst = std::max(worst, std::fabs(lhs - k_p(g, p, sol.u, sol.v, pe)) / std::fabs(sol.level));
  }
  const double t = seconds_since(t0);
  v.detail << "beta " << beta << ", level " << sol.level << " < " << e_sum << ", min mass " << mass
           << ", det margin " << (det - bound) / scale << ", identity error " << worst << " (" << t << " s)";
  v.require(mass > 1e-3, "both masses");
  v.require(sol.level < e_sum, "level below scalar sum");
  v.require(det >= bound - 1e-10 * scale, "determinant bound");
  v.require(worst <= 1e-10, "energy identity");
  v.require(t < 120.0, "under 120 s");
}

void vanishing_coupling(Verdict& v) {
  const Problem& pr = square63();
  const double beta_max = small_range(pr);
  double prev = std::numeric_limits<double>::infinity();
  v.detail << "distances";
  for (double f : {0.2, 0.1, 0.05, 0.02}) {
    const SystemSolution sol = solve_small_beta(pr.grid, with_beta(pr.params, f * beta_max), pr.seeds);
    const double d = h1_distance(pr.grid, sol, pr.seeds);
    v.detail << " " << d;
    v.require(d < prev, "strictly decreasing at " + std::to_string(f));
    prev = d;
  }
}

void strong_coupling(Verdict& v) {
  const auto t0 = Clock::now();
  const Problem& pr = square63();
  const Grid& g = pr.grid;
  const double e1 = pr.seeds.first.energy;
  const double e2 = pr.seeds.second.energy;
  const double b5 = quartic_threshold(g, pr.seeds.first);
  const double b6 = quartic_threshold(g, pr.seeds.second);
  const double bar0 = 4.0 * std::max(e1 * b5, e2 * b6) / std::min(e1, e2);
  const double lam = pr.seeds.lambda_domain;
  const double coercive =
      std::min({1.0, (pr.params.lambda1 + lam) / lam, (pr.params.lambda2 + lam) / lam});
  double prev_level = std::numeric_limits<double>::infinity();
  double prev_grad = std::numeric_limits<double>::infinity();
  v.detail << "levels";
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    const double beta = f * bar0;
    const SystemSolution sol = solve_large_beta(g, with_beta(pr.params, beta), pr.seeds);
    const double d = sol.level;
    const double gu = std::sqrt(dirichlet_energy(g, sol.u));
    const double gv = std::sqrt(dirichlet_energy(g, sol.v));
    v.detail << " " << d;
    const std::string at = " at " + std::to_string(f);
    v.require(d <= prev_level, "non-increasing" + at);
    v.require(d < std::min(e1, e2), "below min scalar" + at);
    v.require(beta * d <= 4.0 * std::max(e1 * b5, e2 * b6) * 1.02, "decay bound" + at);
    v.require(gu * gu + gv * gv <= 4.0 * d / coercive, "norm bound" + at);
    v.require(gu + gv < prev_grad, "gradient norms decreasing" + at);
    prev_level = d;
    prev_grad = gu + gv;
  }
  const double t = seconds_since(t0);
  v.detail << " (" << t << " s)";
  v.require(t < 180.0, "under 180 s");
}

void competitive_coupling(Verdict& v) {
  const Problem& pr = square63();
  const double e_sum = pr.seeds.first.energy + pr.seeds.second.energy;
  std::vector<double> slopes;
  std::vector<double> distances;
  for (double f : {-0.01, -0.05, -0.1}) {
    const ModelParams p = with_beta(pr.params, f * pr.params.sqrt_mu1mu2());
    const SystemSolution sol = solve_negative_beta(pr.grid, p, pr.seeds);
    const LevelBoxMax box = level_box_max(pr.grid, p, pr.seeds);
    const std::string at = " at " + std::to_string(f);
    v.require(min_value(sol.u) > 0.0 && min_value(sol.v) > 0.0, "positive" + at);
    v.require(sol.level <= box.value * (1.0 + 1e-12), "level below box maximum" + at);
    distances.push_back(h1_distance(pr.grid, sol, pr.seeds));
    slopes.push_back(std::fabs(box.value - e_sum) / std::fabs(p.beta));
  }
  v.require(distances[0] < distances[1] && distances[1] < distances[2], "distance shrinks with |beta|");
  const auto [lo, hi] = std::minmax_element(slopes.begin(), slopes.end());
  v.detail << "distances " << distances[0] << " " << distances[1] << " " << distances[2] << "; slopes " << slopes[0]
           << " " << slopes[1] << " " << slopes[2];
  v.require(*hi <= 1.2 * *lo, "slope stable within 20%");
}

double fd_ratio(const std::function<double(double)>& directional, double exact) {
  const double e1 = std::fabs((directional(1e-3) - directional(-1e-3)) / 2e-3 - exact);
  const double e2 = std::fabs((directional(5e-4) - directional(-5e-4)) / 1e-3 - exact);
  return e1 / e2;
}

void oracle_equivalence(Verdict& v) {
  const Grid g = build_domain(Shape::UnitSquare, 31);
  std::mt19937_64 rng(42);
  const ModelParams decoupled{1.0, -2.0, 1.5, 0.8, 0.0};
  double worst_root = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Field u = oracle::random_smooth_field(g, rng, true);
    const Field w = oracle::random_smooth_field(g, rng, true);
    const FiberCoords fc = project_m_beta(g, decoupled, u, w);
    const double t = fiber_root_scalar(g, decoupled.lambda1, decoupled.mu1, u);
    const double s = fiber_root_scalar(g, decoupled.lambda2, decoupled.mu2, w);
    worst_root = std::max({worst_root, std::fabs(fc.t - t) / t, std::fabs(fc.s - s) / s});
  }
  v.require(worst_root <= 1e-10, "projection matches scalar roots");

  const ModelParams coop{0.0, 0.0, 1.0, 1.0, 2.0};
  int bad_rays = 0;
  for (int ray = 0; ray < 50; ++ray) {
    const Field u = oracle::random_smooth_field(g, rng, true);
    const Field w = oracle::random_smooth_field(g, rng, true);
    const double t = fiber_root_diag(g, coop, u, w);
    std::vector<double> values;
    for (double f = 0.05; f < 20.0; f *= 1.3) {
      try {
        const auto gc = constraints_g(g, coop, std::sqrt(t * f) * u, std::sqrt(t * f) * w);
        values.push_back(gc[0] + gc[1]);
      } catch (const OverflowError&) {
        break;
      }
    }
    bad_rays += oracle::sign_changes(values) != 1;
  }
  v.require(bad_rays == 0, "one sign change per ray");

  const ModelParams p{0.3, 0.1, 1.0, 1.5, 0.6};
  const ModelParams n{0.3, 0.1, 1.0, 1.5, -0.1};
  const Field u = oracle::random_smooth_field(g, rng, true);
  const Field w = oracle::random_smooth_field(g, rng, true);
  const Field a = oracle::random_smooth_field(g, rng);
  const Field b = oracle::random_smooth_field(g, rng);
  const Field phi = oracle::random_smooth_field(g, rng);
  const Field psi = oracle::random_smooth_field(g, rng);
  const FieldPair gr = energy_grad(g, p, u, w);
  const double r1 = fd_ratio([&](double e) { return energy(g, p, u + e * phi, w + e * psi); },
                             l2_inner(g, gr.u, phi) + l2_inner(g, gr.v, psi));
  const FieldPair gt = grad_tilde(g, n, a, b);
  const double r2 = fd_ratio([&](double e) { return energy_tilde(g, n, a + e * phi, b + e * psi); },
                             l2_inner(g, gt.u, phi) + l2_inner(g, gt.v, psi));
  v.detail << "worst root mismatch " << worst_root << ", bad rays " << bad_rays << ", difference ratios " << r1 << " "
           << r2;
  v.require(r1 >= 3.5 && r1 <= 4.5, "energy gradient ratio");
  v.require(r2 >= 3.5 && r2 <= 4.5, "positive-part gradient ratio");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<cli::RunConfig> suite(const fs::path& root, int workers) {
  struct Entry {
    const char* name;
    const char* beta_units;
    const char* body;
  };
  const Entry runs[] = {
      {"scalar", "absolute", "[run]\nregime = scalar\n"},
      {"small", "beta_max", "[run]\nregime = sweep\n[sweep]\nbetas = 0.2, 0.1, 0.05, 0.02\n"},
      {"large", "beta_bar0", "[run]\nregime = sweep\n[sweep]\nbetas = 1, 2, 5, 10\n"},
      {"negative", "sqrt_mu", "[run]\nregime = sweep\n[sweep]\nbetas = -0.01, -0.05, -0.1\n"},
      {"constants", "absolute", "[run]\nregime = constants\n"},
      {"inequalities", "absolute", "[run]\nregime = inequalities\n"},
  };
  std::vector<cli::RunConfig> out;
  for (const Entry& e : runs) {
    const std::string text = std::string("[domain]\nshape = square\nn = 63\n[params]\nmu1 = 1\nmu2 = 1\nbeta_units = ") +
                             e.beta_units + "\n[solver]\nseed = 42\n" + e.body;
    cli::RunConfig c = cli::parse_config_text(text);
    c.workers = workers;
    c.output_dir = root / e.name;
    out.push_back(std::move(c));
  }
  return out;
}

void determinism(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "mosersys_acceptance";
  fs::remove_all(root);
  int failures = 0;
  for (int pass : {0, 1}) {
    for (const auto& c : suite(root / (pass == 0 ? "first" : "second"), pass == 0 ? 1 : 3)) {
      const auto outcome = cli::run(c);
      if (outcome.exit_code != cli::kExitOk) ++failures;
    }
  }
  int compared = 0;
  int differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "first")) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path twin = root / "second" / fs::relative(entry.path(), root / "first");
    ++compared;
    differing += !fs::exists(twin) || slurp(entry.path()) != slurp(twin);
  }
  v.detail << compared << " CSV files compared, " << differing << " differ, " << failures << " runs not clean";
  v.require(compared > 0, "some CSV output");
  v.require(differing == 0, "byte-identical CSVs");
  v.require(failures == 0, "all runs exit 0");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"eigenvalue ground truth", eigenvalues},
      {"inequality suites", inequalities},
      {"C(pi)/pi closed form", c_gamma_value},
      {"scalar ground state on the disk", scalar_ground_state},
      {"small coupling solution", small_coupling},
      {"vanishing coupling trend", vanishing_coupling},
      {"strong coupling regime", strong_coupling},
      {"competitive coupling regime", competitive_coupling},
      {"oracle equivalence", oracle_equivalence},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      check(v);
    } catch (const std::exception& e) {
      v.passed = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    std::printf("[%s] %2d %s (%.2f s): %s\n", v.passed ? "PASS" : "FAIL", index, name.c_str(), seconds_since(t0),
                v.detail.str().c_str());
    std::fflush(stdout);
    failed += !v.passed;
  }
  std::printf("%d of %zu criteria passed\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
