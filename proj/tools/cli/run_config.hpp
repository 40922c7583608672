#pragma once

// Run configuration read from an INI-style file ([section] key = value).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mosersys/errors.hpp"
#include "mosersys/grid.hpp"
#include "mosersys/nonlin.hpp"
#include "mosersys/scalar.hpp"
#include "mosersys/system.hpp"

namespace mosersys::cli {

enum class RunKind { Scalar, SmallBeta, LargeBeta, NegativeBeta, Constants, Inequalities, Sweep };
std::string_view to_string(RunKind kind);
RunKind parse_run_kind(std::string_view text);

/// How configured beta values are scaled before use.
enum class BetaUnits { Absolute, BetaBar0, BetaMax, SqrtMu };
std::string_view to_string(BetaUnits units);
BetaUnits parse_beta_units(std::string_view text);

/// Which solver a sweep entry uses; Auto picks by sign and the small range.
enum class SweepSolver { Auto, SmallBeta, LargeBeta, NegativeBeta };

/// Thrown for malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct RunConfig {
  Shape shape = Shape::UnitSquare;
  int n = 63;
  ModelParams params;
  BetaUnits beta_units = BetaUnits::Absolute;
  RunKind kind = RunKind::Scalar;

  std::vector<double> beta_list;
  SweepSolver sweep_solver = SweepSolver::Auto;
  int workers = 1;
  bool write_fields = true;

  SolverOptions scalar;
  SystemOptions system;

  std::optional<double> d4pi;
  int profile_grid_n = 1025;
  int family_level = 2;

  long inequality_samples = 100000;
  int integral_fields = 50;
  int moser_trials = 10;

  std::filesystem::path output_dir = "out";

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mosersys::cli
