#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchord/core.hpp"

namespace patchord {

// half-open index window rendered by the spy plot; defaults to the full matrix
struct SpyRoi {
  index_t row_lo = 0, row_hi = 0;
  index_t col_lo = 0, col_hi = 0;
};

// Occupancy-count pooling onto an image_side x image_side grid; pixel value
// 255 - min(255, round(255 * count / peak)), so denser cells render darker
// and an empty pattern renders all white.
std::vector<std::uint8_t> spy_pixels(const SparsePattern& p, index_t image_side,
                                     const SpyRoi& roi);

// Renders to a binary PGM (P5, maxval 255).  An all-zero ROI means the full
// index range.
void spy_image(const SparsePattern& p, index_t image_side, const std::string& out_path,
               const SpyRoi& roi = {});

}  // namespace patchord
