#pragma once

// Field CSV files (header i,j,value) with a JSON sidecar {shape, n, h}.

#include <filesystem>
#include <string>

#include "mosersys/grid.hpp"

namespace mosersys {

/// CSV text of a field; values printed with 17 significant digits.
std::string field_csv(const Grid& grid, const Field& f);
/// {"shape": ..., "n": ..., "h": ...}
std::string grid_metadata_json(const Grid& grid);

/// Writes <path> and <path>.json; throws Error on I/O failure.
void write_field(const std::filesystem::path& path, const Grid& grid, const Field& f);

/// Reads a CSV written by write_field back onto grid. Throws DomainError on
/// malformed rows or nodes outside the grid.
Field read_field_csv(const std::filesystem::path& path, const Grid& grid);

}  // namespace mosersys
