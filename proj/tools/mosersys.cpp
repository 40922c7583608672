// mosersys run --config <path> [--out <dir>] [--verbose]

#include <iostream>

#include "CLI11.hpp"
#include "cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace mosersys::cli;
  CLI::App app{"Ground states of exponentially coupled elliptic systems"};
  app.require_subcommand(1);
  auto* run_cmd = app.add_subcommand("run", "execute a configured run");
  std::string config_path;
  std::string out_dir;
  bool verbose = false;
  run_cmd->add_option("--config", config_path, "INI run configuration")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "output directory (overrides run.output)");
  run_cmd->add_flag("--verbose,-v", verbose, "progress messages on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "mosersys: " << e.what() << '\n';
    return kExitValidation;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;

  const RunOutcome outcome = run(config, verbose ? &std::cerr : nullptr);
  std::cout << "mosersys: " << outcome.message << " (exit " << outcome.exit_code << ")\n";
  std::size_t failed = 0;
  for (const auto& c : outcome.certificates) {
    if (!c.passed) {
      ++failed;
      std::cout << "  FAILED " << c.name << " value=" << c.value << " bound=" << c.bound << '\n';
    }
  }
  std::cout << "  " << outcome.certificates.size() - failed << "/" << outcome.certificates.size()
            << " certificates passed, " << outcome.files.size() << " files in " << config.output_dir.string()
            << '\n';
  return outcome.exit_code;
}
