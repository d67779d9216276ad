#pragma once

#include "filtop/types.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace filtop {

/// Binary matrix format: magic "DFM1", then row and column counts as 64-bit
/// little-endian unsigned integers, then rows*cols IEEE-754 doubles,
/// little-endian, row-major. File size is exactly 20 + 8*rows*cols bytes and
/// a write/read round trip is bit-identical.
void write_matrix(const std::filesystem::path& path, const Matrix& matrix);
Matrix read_matrix(const std::filesystem::path& path);

/// Plain-text manifest: one "key = value" line per entry, in order.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path);

}  // namespace filtop
