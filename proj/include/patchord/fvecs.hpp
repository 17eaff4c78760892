#pragma once

#include <string>

#include "patchord/core.hpp"

namespace patchord {

// Reads repeated {int32 dim, dim x float32} little-endian records; every
// record must share one dim.
PointSet read_fvecs(const std::string& path);

// Writes the same layout, narrowing coordinates to float32.
void write_fvecs(const std::string& path, const PointSet& points);

}  // namespace patchord
