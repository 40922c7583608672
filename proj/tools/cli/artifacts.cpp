#include "cli/artifacts.hpp"

#include <boost/crc.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mosersys/errors.hpp"
#include "mosersys/field_io.hpp"

namespace mosersys::cli {

std::uint32_t crc32_of(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error("cannot create output directory " + root_.string() + ": " + ec.message());
}

void ArtifactWriter::write_text(const std::string& relative, const std::string& content) {
  const auto path = root_ / relative;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error("cannot write " + path.string());
  files_.push_back({relative, content.size(), crc32_of(content)});
}

void ArtifactWriter::write_field(const std::string& relative, const Grid& grid, const Field& f) {
  write_text(relative, field_csv(grid, f));
  write_text(relative + ".json", grid_metadata_json(grid));
}

}  // namespace mosersys::cli
