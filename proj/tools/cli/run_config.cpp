#include "cli/run_config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace mosersys::cli {

namespace pt = boost::property_tree;

namespace {

struct Name {
  std::string_view text;
  int value;
};

template <class Enum, std::size_t N>
Enum parse_named(std::string_view text, const Name (&names)[N], const char* what) {
  for (const auto& n : names) {
    if (n.text == text) return static_cast<Enum>(n.value);
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

template <class Enum, std::size_t N>
std::string_view name_of(Enum e, const Name (&names)[N]) {
  for (const auto& n : names) {
    if (n.value == static_cast<int>(e)) return n.text;
  }
  return "?";
}

constexpr Name kRunKinds[] = {
    {"scalar", static_cast<int>(RunKind::Scalar)},
    {"small-beta", static_cast<int>(RunKind::SmallBeta)},
    {"large-beta", static_cast<int>(RunKind::LargeBeta)},
    {"negative-beta", static_cast<int>(RunKind::NegativeBeta)},
    {"constants", static_cast<int>(RunKind::Constants)},
    {"inequalities", static_cast<int>(RunKind::Inequalities)},
    {"sweep", static_cast<int>(RunKind::Sweep)},
};

constexpr Name kBetaUnits[] = {
    {"absolute", static_cast<int>(BetaUnits::Absolute)},
    {"beta_bar0", static_cast<int>(BetaUnits::BetaBar0)},
    {"beta_max", static_cast<int>(BetaUnits::BetaMax)},
    {"sqrt_mu", static_cast<int>(BetaUnits::SqrtMu)},
};

constexpr Name kSweepSolvers[] = {
    {"auto", static_cast<int>(SweepSolver::Auto)},
    {"small-beta", static_cast<int>(SweepSolver::SmallBeta)},
    {"large-beta", static_cast<int>(SweepSolver::LargeBeta)},
    {"negative-beta", static_cast<int>(SweepSolver::NegativeBeta)},
};

// every key the parser understands; anything else is a typo worth reporting
const std::set<std::string> kKnownKeys = {
    "domain.shape",         "domain.n",
    "params.lambda1",       "params.lambda2",        "params.mu1",           "params.mu2",
    "params.beta",          "params.beta_units",
    "run.regime",           "run.output",            "run.write_fields",
    "sweep.betas",          "sweep.solver",          "sweep.workers",
    "solver.tol",           "solver.max_iter",       "solver.restarts",      "solver.seed",
    "system.tol",           "system.max_iter",       "system.beta_negative_cap",
    "system.trust_radius",  "system.level_grid_points",
    "constants.d4pi",       "constants.profile_grid_n", "constants.family_level",
    "inequalities.samples", "inequalities.integral_fields", "inequalities.moser_trials",
};

// ptree's defaulted get() swallows conversion errors, so convert the raw text here
template <class T>
T get(const pt::ptree& tree, const char* key, T fallback) {
  const auto raw = tree.get_optional<std::string>(key);
  if (!raw) return fallback;
  const std::string text = boost::trim_copy(*raw);
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else {
    if (std::is_unsigned_v<T> && text.starts_with('-')) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
    try {
      return boost::lexical_cast<T>(text);
    } catch (const boost::bad_lexical_cast&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
  std::vector<double> out;
  for (auto& part : parts) {
    boost::trim(part);
    if (part.empty()) continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw ConfigError("bad number '" + part + "' in sweep.betas");
    out.push_back(value);
  }
  return out;
}

bool parse_bool(const std::string& text) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("bad boolean '" + text + "'");
}

}  // namespace

std::string_view to_string(RunKind kind) { return name_of(kind, kRunKinds); }
RunKind parse_run_kind(std::string_view text) { return parse_named<RunKind>(text, kRunKinds, "regime"); }
std::string_view to_string(BetaUnits units) { return name_of(units, kBetaUnits); }
BetaUnits parse_beta_units(std::string_view text) {
  return parse_named<BetaUnits>(text, kBetaUnits, "beta_units");
}

void RunConfig::validate() const {
  if (n < 3) throw ConfigError("domain.n must be at least 3");
  if (!(params.mu1 > 0.0) || !(params.mu2 > 0.0)) throw ConfigError("params.mu1 and params.mu2 must be positive");
  if (!(scalar.tol > 0.0) || !(system.tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (scalar.max_iter < 1 || system.max_iter < 1) throw ConfigError("max_iter must be positive");
  if (scalar.restarts < 0) throw ConfigError("solver.restarts must be non-negative");
  if (kind == RunKind::Sweep && beta_list.empty()) throw ConfigError("sweep.betas must not be empty");
  if (workers < 1) throw ConfigError("sweep.workers must be at least 1");
  if (d4pi && !(*d4pi > 0.0)) throw ConfigError("constants.d4pi must be positive");
  if (profile_grid_n < 256) throw ConfigError("constants.profile_grid_n must be at least 256");
  if (family_level < 0 || family_level > 8) throw ConfigError("constants.family_level must lie in [0, 8]");
  if (inequality_samples < 1 || integral_fields < 1 || moser_trials < 1) {
    throw ConfigError("inequality sample counts must be positive");
  }
  if (system.level_grid_points < 2) throw ConfigError("system.level_grid_points must be at least 2");
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      if (!kKnownKeys.count(section + "." + key)) {
        throw ConfigError("config: unknown key '" + section + "." + key + "'");
      }
    }
  }

  RunConfig c;
  try {
    c.shape = parse_shape(get<std::string>(tree, "domain.shape", "square"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.n = get(tree, "domain.n", c.n);

  c.params.lambda1 = get(tree, "params.lambda1", c.params.lambda1);
  c.params.lambda2 = get(tree, "params.lambda2", c.params.lambda2);
  c.params.mu1 = get(tree, "params.mu1", c.params.mu1);
  c.params.mu2 = get(tree, "params.mu2", c.params.mu2);
  c.params.beta = get(tree, "params.beta", c.params.beta);
  c.beta_units = parse_beta_units(get<std::string>(tree, "params.beta_units", "absolute"));

  c.kind = parse_run_kind(get<std::string>(tree, "run.regime", "scalar"));
  c.output_dir = get<std::string>(tree, "run.output", c.output_dir.string());
  if (auto w = tree.get_optional<std::string>("run.write_fields")) c.write_fields = parse_bool(*w);

  if (auto b = tree.get_optional<std::string>("sweep.betas")) c.beta_list = parse_list(*b);
  c.sweep_solver = parse_named<SweepSolver>(get<std::string>(tree, "sweep.solver", "auto"),
                                            kSweepSolvers, "sweep.solver");
  c.workers = get(tree, "sweep.workers", c.workers);

  c.scalar.tol = get(tree, "solver.tol", c.scalar.tol);
  c.scalar.max_iter = get(tree, "solver.max_iter", c.scalar.max_iter);
  c.scalar.restarts = get(tree, "solver.restarts", c.scalar.restarts);
  c.scalar.seed = get<std::uint64_t>(tree, "solver.seed", c.scalar.seed);

  c.system.tol = get(tree, "system.tol", c.system.tol);
  c.system.max_iter = get(tree, "system.max_iter", c.system.max_iter);
  c.system.beta_negative_cap = get(tree, "system.beta_negative_cap", c.system.beta_negative_cap);
  c.system.trust_radius = get(tree, "system.trust_radius", c.system.trust_radius);
  c.system.level_grid_points = get(tree, "system.level_grid_points", c.system.level_grid_points);

  if (tree.get_optional<std::string>("constants.d4pi")) c.d4pi = get(tree, "constants.d4pi", 0.0);
  c.profile_grid_n = get(tree, "constants.profile_grid_n", c.profile_grid_n);
  c.family_level = get(tree, "constants.family_level", c.family_level);

  c.inequality_samples = get(tree, "inequalities.samples", c.inequality_samples);
  c.integral_fields = get(tree, "inequalities.integral_fields", c.integral_fields);
  c.moser_trials = get(tree, "inequalities.moser_trials", c.moser_trials);

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace mosersys::cli
