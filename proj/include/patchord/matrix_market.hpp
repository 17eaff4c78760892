#pragma once

#include <string>

#include "patchord/core.hpp"

namespace patchord {

// Matrix Market coordinate format, 1-based indices.
// Valued matrices use "real general"; structure-only files use "pattern general".
void write_matrix_market(const SparseMatrix& m, const std::string& path);
void write_matrix_market(const SparsePattern& p, const std::string& path);

// Reads either variant; pattern files come back with all values = 1.0.
SparseMatrix read_matrix_market(const std::string& path);

// Reads either variant, keeping structure only.
SparsePattern read_matrix_market_pattern(const std::string& path);

}  // namespace patchord
