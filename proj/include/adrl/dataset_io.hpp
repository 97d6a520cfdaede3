#pragma once

#include <filesystem>
#include <string>

#include "adrl/data.hpp"
#include "adrl/matrix.hpp"

namespace adrl {

// Binary matrix file: 16-byte header ("MVML", u32 rows, u32 cols, u32
// reserved = 0), then rows*cols little-endian IEEE-754 doubles, row-major.

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Writes manifest.json plus one .mvml file per matrix into `dir`.
void write_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

/// Accepts a manifest path or the directory that contains manifest.json.
/// Mask and split files are optional (default: fully observed, all train).
MultiViewDataset load_dataset(const std::filesystem::path& manifest_or_dir);

/// Comma-separated numeric table. A first row that does not parse as numbers
/// is treated as a header and skipped.
Matrix import_csv(const std::filesystem::path& path);

}  // namespace adrl
