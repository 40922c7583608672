#pragma once

// Output directory bookkeeping: every file written goes through ArtifactWriter
// so the manifest can list it with its size and CRC-32.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mosersys/grid.hpp"

namespace mosersys::cli {

struct FileEntry {
  std::string path;  ///< relative to the output directory
  std::uintmax_t bytes = 0;
  std::uint32_t crc32 = 0;
};

std::uint32_t crc32_of(std::string_view bytes);

/// Fixed "%.17g" rendering used for every CSV number.
std::string format_number(double x);

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  void write_text(const std::string& relative, const std::string& content);
  /// <relative> as CSV plus the <relative>.json grid sidecar.
  void write_field(const std::string& relative, const Grid& grid, const Field& f);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<FileEntry>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<FileEntry> files_;
};

}  // namespace mosersys::cli
