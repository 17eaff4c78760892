#include "patchord/fvecs.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

namespace patchord {

static_assert(std::endian::native == std::endian::little && sizeof(float) == 4,
              ".fvecs I/O assumes a little-endian host with 32-bit floats");

PointSet read_fvecs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open " + path);
  std::vector<double> coords;
  index_t dim = -1, n_points = 0;
  std::int32_t rec_dim = 0;
  while (in.read(reinterpret_cast<char*>(&rec_dim), 4)) {
    if (rec_dim <= 0)
      throw error(errc::malformed_record, "record " + std::to_string(n_points) + " in " + path +
                                              " declares dimension " + std::to_string(rec_dim));
    if (dim == -1)
      dim = rec_dim;
    else if (rec_dim != dim)
      throw error(errc::inconsistent_dim, "record " + std::to_string(n_points) + " in " + path +
                                              " has dimension " + std::to_string(rec_dim) +
                                              ", expected " + std::to_string(dim));
    std::vector<float> rec(static_cast<std::size_t>(rec_dim));
    if (!in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(4 * rec.size())))
      throw error(errc::malformed_record,
                  "record " + std::to_string(n_points) + " in " + path + " is truncated");
    coords.insert(coords.end(), rec.begin(), rec.end());
    ++n_points;
  }
  if (in.gcount() != 0)
    throw error(errc::malformed_record, "trailing bytes after the last record in " + path);
  if (n_points == 0) throw error(errc::empty_file, path + " holds no records");
  return make_point_set(n_points, dim, std::move(coords));
}

void write_fvecs(const std::string& path, const PointSet& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  const std::int32_t dim = points.dim;
  for (index_t i = 0; i < points.n_points; ++i) {
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (index_t c = 0; c < points.dim; ++c) {
      const float v = static_cast<float>(points.point(i)[c]);
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

}  // namespace patchord
