#include "mosersys/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mosersys/errors.hpp"

namespace mosersys {

std::string field_csv(const Grid& grid, const Field& f) {
  require_on_grid(grid, f, "field_csv");
  std::string out = "i,j,value\n";
  out.reserve(out.size() + 40 * f.size());
  char line[64];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [i, j] = grid.node(k);
    std::snprintf(line, sizeof line, "%d,%d,%.17g\n", i, j, f[k]);
    out += line;
  }
  return out;
}

std::string grid_metadata_json(const Grid& grid) {
  nlohmann::ordered_json j;
  j["shape"] = std::string(to_string(grid.shape()));
  j["n"] = grid.n();
  j["h"] = grid.h();
  return j.dump(2) + "\n";
}

namespace {
void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + path.string());
}
}  // namespace

void write_field(const std::filesystem::path& path, const Grid& grid, const Field& f) {
  write_text(path, field_csv(grid, f));
  auto meta = path;
  meta += ".json";
  write_text(meta, grid_metadata_json(grid));
}

Field read_field_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "i,j,value") {
    throw DomainError(path.string() + ": missing i,j,value header");
  }
  Field f(grid);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int i = 0;
    int j = 0;
    double value = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lg", &i, &j, &value) != 3) {
      throw DomainError(path.string() + ": malformed row '" + line + "'");
    }
    const auto k = grid.index(i, j);
    if (k < 0) throw DomainError(path.string() + ": node outside the grid");
    f[static_cast<std::size_t>(k)] = value;
  }
  return f;
}

}  // namespace mosersys
