#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/run_config.hpp"

namespace mosersys::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNonConvergence = 3,
  kExitCertificate = 4,
};

struct CertificateRecord {
  std::string name;  ///< scope/name, e.g. "small-beta/level_below_scalar_sum"
  bool passed = false;
  double value = 0.0;
  double bound = 0.0;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::vector<CertificateRecord> certificates;
  std::vector<FileEntry> files;  ///< everything written, manifest.json last
};

/// Executes one configured run, writes its artifacts and manifest.json into
/// config.output_dir and never throws for solver or validation failures; the
/// outcome's exit code classifies them. log may be null.
RunOutcome run(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace mosersys::cli
