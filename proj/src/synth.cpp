#include "patchord/synth.hpp"

#include <algorithm>
#include <unordered_set>

namespace patchord {

SparsePattern gen_arrowhead(index_t n, index_t b) {
  if (n <= 0 || b <= 0) throw error(errc::invalid_argument, "arrowhead sizes must be positive");
  if (n % b != 0)
    throw error(errc::not_divisible, "block size " + std::to_string(b) + " does not divide " +
                                         std::to_string(n));
  const index_t nb = n / b;
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(static_cast<std::size_t>(3 * nb - 2) * b * b);
  auto add_block = [&](index_t bi, index_t bj) {
    for (index_t r = 0; r < b; ++r)
      for (index_t c = 0; c < b; ++c) entries.emplace_back(bi * b + r, bj * b + c);
  };
  for (index_t d = 0; d < nb; ++d) add_block(d, d);
  for (index_t j = 1; j < nb; ++j) add_block(0, j);
  for (index_t i = 1; i < nb; ++i) add_block(i, 0);
  return make_pattern(n, n, std::move(entries));
}

SparsePattern gen_banded(index_t n, index_t nnz_per_row) {
  if (n <= 0 || nnz_per_row <= 0) throw error(errc::invalid_argument, "banded sizes must be positive");
  if (nnz_per_row > n)
    throw error(errc::too_wide, "band width " + std::to_string(nnz_per_row) + " exceeds n");
  const index_t w = nnz_per_row;
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(static_cast<std::size_t>(n) * w);
  for (index_t i = 0; i < n; ++i) {
    index_t lo = std::max<index_t>(0, i - w / 2);
    index_t hi = std::min<index_t>(n, i + (w + 1) / 2);
    for (index_t j = lo; j < hi; ++j) entries.emplace_back(i, j);
  }
  return make_pattern(n, n, std::move(entries));
}

SparsePattern gen_scattered(index_t n, index_t nnz_per_row, std::uint64_t seed) {
  if (n <= 0 || nnz_per_row <= 0)
    throw error(errc::invalid_argument, "scattered sizes must be positive");
  if (nnz_per_row > n)
    throw error(errc::too_many, "nnz_per_row " + std::to_string(nnz_per_row) + " exceeds n");
  Rng rng(seed);
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(static_cast<std::size_t>(n) * nnz_per_row);
  std::unordered_set<index_t> picked;
  for (index_t i = 0; i < n; ++i) {
    picked.clear();
    while (static_cast<index_t>(picked.size()) < nnz_per_row) {
      index_t j = static_cast<index_t>(rng.bounded(static_cast<std::uint64_t>(n)));
      if (picked.insert(j).second) entries.emplace_back(i, j);
    }
  }
  return make_pattern(n, n, std::move(entries));
}

PointSet gen_gaussian_mixture(index_t n_points, index_t dim, index_t n_clusters,
                              double center_spread, double cluster_sigma, std::uint64_t seed) {
  if (n_points <= 0 || dim <= 0 || n_clusters <= 0 || center_spread <= 0.0 || cluster_sigma <= 0.0)
    throw error(errc::invalid_argument, "mixture parameters must be positive");
  Rng rng(seed);
  std::vector<double> centers(static_cast<std::size_t>(n_clusters) * dim);
  for (double& c : centers) c = rng.uniform01() * center_spread;
  std::vector<double> coords(static_cast<std::size_t>(n_points) * dim);
  for (index_t p = 0; p < n_points; ++p) {
    const double* center = centers.data() + static_cast<std::size_t>(p % n_clusters) * dim;
    double* out = coords.data() + static_cast<std::size_t>(p) * dim;
    for (index_t a = 0; a < dim; ++a) out[a] = center[a] + cluster_sigma * rng.normal();
  }
  return make_point_set(n_points, dim, std::move(coords));
}

}  // namespace patchord
