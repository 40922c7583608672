#include <boost/crc.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"
#include "cli/runner.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace mosersys;
using namespace mosersys::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mosersys_test_cli" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest_of(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

const nlohmann::json* find_certificate(const nlohmann::json& m, const std::string& name) {
  for (const auto& c : m["certificates"]) {
    if (c["name"] == name) return &c;
  }
  return nullptr;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

RunConfig base(const std::string& regime, const fs::path& out, int n = 31) {
  RunConfig c = parse_config_text("[domain]\nshape = square\nn = " + std::to_string(n) +
                                  "\n[params]\nlambda1 = 0\nlambda2 = 0\nmu1 = 1\nmu2 = 1\n[run]\nregime = " + regime +
                                  "\nwrite_fields = false\n[solver]\nrestarts = 0\n" +
                                  (regime == "sweep" ? "[sweep]\nbetas = 1\n" : ""));
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const RunConfig c = parse_config_text(
      "[domain]\nshape = disk\nn = 31\n[params]\nlambda1 = -1.5\nmu1 = 2\nmu2 = 3\nbeta = 0.25\n"
      "beta_units = sqrt_mu\n[run]\nregime = sweep\n[sweep]\nbetas = 0.1, 0.2 0.3\nworkers = 3\n");
  CHECK(c.shape == Shape::UnitDisk);
  CHECK(c.n == 31);
  CHECK(c.params.lambda1 == -1.5);
  CHECK(c.params.lambda2 == 0.0);
  CHECK(c.params.mu2 == 3.0);
  CHECK(c.beta_units == BetaUnits::SqrtMu);
  CHECK(c.kind == RunKind::Sweep);
  CHECK(c.beta_list == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(c.workers == 3);
  CHECK(c.scalar.seed == 42);
  CHECK(c.scalar.tol > 0.0);
}

TEST_CASE("config errors") {
  const char* bad[] = {
      "[domain]\nshape = triangle\n",
      "[domain]\nn = 2\n",
      "[domain]\nn = many\n",
      "[domain]\nn = 3.5\n",
      "[solver]\nseed = -1\n",
      "[params]\nbeta = 0.1x\n",
      "[domain]\ncolour = red\n",
      "[params]\nmu1 = -1\n",
      "[solver]\ntol = 0\n",
      "[run]\nregime = sweep\n",
      "[run]\nregime = dance\n",
      "[sweep]\nbetas = 1, x\n",
      "[sweep]\nworkers = 0\n",
      "[constants]\nd4pi = -3\n",
      "[run]\nwrite_fields = maybe\n",
      "[domain\nshape = square\n",
  };
  for (const char* text : bad) {
    CAPTURE(std::string(text));
    CHECK_THROWS_AS(parse_config_text(text), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/mosersys.ini"), ConfigError);
}

TEST_CASE("constants run on symmetric data flags the collapse identities") {
  const fs::path out = scratch("constants");
  RunConfig c = base("constants", out);
  c.profile_grid_n = 257;
  c.family_level = 1;
  const RunOutcome r = run(c);
  CHECK(r.exit_code == kExitOk);
  const auto m = manifest_of(out);
  for (const char* name : {"constants/symmetric_beta1_equals_beta5", "constants/symmetric_beta2_equals_beta6",
                           "constants/symmetric_beta_bar0_equals_4beta5"}) {
    CAPTURE(name);
    const auto* cert = find_certificate(m, name);
    REQUIRE(cert != nullptr);
    CHECK((*cert)["passed"] == true);
  }
  CHECK(m["all_certificates_passed"] == true);
}

TEST_CASE("manifest lists every written file with its checksum") {
  const fs::path out = scratch("manifest");
  RunConfig c = base("scalar", out);
  c.write_fields = true;
  const RunOutcome r = run(c);
  REQUIRE(r.exit_code == kExitOk);
  const auto m = manifest_of(out);
  std::set<std::string> listed;
  for (const auto& f : m["files"]) {
    const std::string path = f["path"];
    listed.insert(path);
    const std::string bytes = slurp(out / path);
    CHECK(f["bytes"] == bytes.size());
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
    CHECK(f["crc32"] == hex);
  }
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), out).generic_string();
    if (rel == "manifest.json") continue;
    CAPTURE(rel);
    CHECK(listed.count(rel) == 1);
  }
  CHECK(listed.count("u1.csv") == 1);
  CHECK(m["certificates"].size() == r.certificates.size());
  CHECK(r.files.back().path == "manifest.json");
}

TEST_CASE("large-coupling sweep emits a non-increasing level column") {
  const fs::path out = scratch("sweep");
  RunConfig c = base("sweep", out);
  c.beta_units = BetaUnits::BetaBar0;
  c.beta_list = {1.0, 2.0, 5.0, 10.0};
  const RunOutcome r = run(c);
  CHECK(r.exit_code == kExitOk);
  const auto rows = read_csv(out / "sweep.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"beta", "level", "grad_norm_u", "grad_norm_v", "cert_level_ordering",
                                            "cert_det_j", "iters"});
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][0]) > std::stod(rows[i - 1][0]));
    CHECK(std::stod(rows[i][1]) <= std::stod(rows[i - 1][1]));
  }
}

TEST_CASE("inequality suite is clean and fast") {
  const fs::path out = scratch("inequalities");
  RunConfig c = base("inequalities", out);
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutcome r = run(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.exit_code == kExitOk);
  CHECK(seconds < 10.0);
  const auto m = manifest_of(out);
  for (const char* name : {"inequalities/product_bound_violations", "inequalities/remainder_bound_violations",
                           "inequalities/secant_bound_violations", "inequalities/euler_bound_violations",
                           "inequalities/l4_control_violations"}) {
    CAPTURE(name);
    const auto* cert = find_certificate(m, name);
    REQUIRE(cert != nullptr);
    CHECK((*cert)["value"] == 0.0);
  }
}

TEST_CASE("exit codes separate validation, non-convergence and certificate failure") {
  SUBCASE("inadmissible lambda") {
    RunConfig c = base("scalar", scratch("exit2"));
    c.params.lambda1 = -100.0;
    CHECK(run(c).exit_code == kExitValidation);
  }
  SUBCASE("starved solver") {
    RunConfig c = base("scalar", scratch("exit3"));
    c.scalar.max_iter = 1;
    CHECK(run(c).exit_code == kExitNonConvergence);
  }
  SUBCASE("scalar level above the band") {
    const fs::path out = scratch("exit4");
    RunConfig c = base("scalar", out, 63);
    c.params.mu1 = c.params.mu2 = 0.05;
    const RunOutcome r = run(c);
    CHECK(r.exit_code == kExitCertificate);
    const auto m = manifest_of(out);
    const auto* cert = find_certificate(m, "scalar/first/energy_in_band");
    REQUIRE(cert != nullptr);
    CHECK((*cert)["passed"] == false);
  }
  SUBCASE("unwritable output directory") {
    RunConfig c = base("scalar", "/proc/mosersys/none");
    CHECK(run(c).exit_code == kExitValidation);
  }
  SUBCASE("small-coupling request outside its range") {
    RunConfig c = base("small-beta", scratch("exit_small"));
    c.params.beta = 2.0;
    CHECK(run(c).exit_code == kExitValidation);
  }
}

TEST_CASE("reruns are byte-identical regardless of the worker count") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  RunConfig c = base("sweep", a);
  c.beta_units = BetaUnits::BetaMax;
  c.beta_list = {0.2, 0.1, 0.05};
  c.write_fields = true;
  c.workers = 1;
  REQUIRE(run(c).exit_code == kExitOk);
  c.output_dir = b;
  c.workers = 3;
  REQUIRE(run(c).exit_code == kExitOk);
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), a);
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared >= 7);
}
