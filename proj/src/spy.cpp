#include "patchord/spy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace patchord {

std::vector<std::uint8_t> spy_pixels(const SparsePattern& p, index_t image_side,
                                     const SpyRoi& roi) {
  if (image_side < 1) throw error(errc::invalid_argument, "image side must be >= 1");
  if (roi.row_lo < 0 || roi.col_lo < 0 || roi.row_hi > p.n_rows || roi.col_hi > p.n_cols ||
      roi.row_lo >= roi.row_hi || roi.col_lo >= roi.col_hi)
    throw error(errc::out_of_bounds, "spy window outside the pattern or empty");

  const double row_scale = static_cast<double>(image_side) / (roi.row_hi - roi.row_lo);
  const double col_scale = static_cast<double>(image_side) / (roi.col_hi - roi.col_lo);
  std::vector<std::int64_t> count(static_cast<std::size_t>(image_side) * image_side, 0);
  for (const auto& [i, j] : p.entries) {
    if (i < roi.row_lo || i >= roi.row_hi || j < roi.col_lo || j >= roi.col_hi) continue;
    const auto r = std::min<index_t>(image_side - 1, static_cast<index_t>((i - roi.row_lo) * row_scale));
    const auto c = std::min<index_t>(image_side - 1, static_cast<index_t>((j - roi.col_lo) * col_scale));
    ++count[static_cast<std::size_t>(r) * image_side + c];
  }
  const std::int64_t peak = *std::max_element(count.begin(), count.end());

  std::vector<std::uint8_t> pixels(count.size(), 255);
  if (peak > 0)
    for (std::size_t q = 0; q < count.size(); ++q) {
      const double shade = std::round(255.0 * static_cast<double>(count[q]) / peak);
      pixels[q] = static_cast<std::uint8_t>(255.0 - std::min(255.0, shade));
    }
  return pixels;
}

void spy_image(const SparsePattern& p, index_t image_side, const std::string& out_path,
               const SpyRoi& roi) {
  SpyRoi window = roi;
  if (window.row_hi == 0 && window.col_hi == 0 && window.row_lo == 0 && window.col_lo == 0)
    window = {0, p.n_rows, 0, p.n_cols};
  const std::vector<std::uint8_t> pixels = spy_pixels(p, image_side, window);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw error(errc::io_error, "cannot open " + out_path + " for writing");
  out << "P5\n" << image_side << " " << image_side << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw error(errc::io_error, "write failed for " + out_path);
}

}  // namespace patchord
