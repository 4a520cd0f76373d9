#pragma once

#include <string>
#include <vector>

#include "attrib/tensor.hpp"

namespace attrib::io {

/// Writes content to a temp file next to `path` and renames it into place,
/// so readers never see a partial artifact.
void write_atomic(const std::string& path, const std::string& content);

/// 8-bit binary PGM (P5) after per-image min-max scaling.
void write_pgm(const std::string& path, const Vec& values, std::size_t rows,
               std::size_t cols);

/// One row of raw floats, comma separated, full double precision.
void write_csv_row(const std::string& path, const Vec& values);

std::string csv_line(const std::vector<std::string>& cells);

}  // namespace attrib::io
