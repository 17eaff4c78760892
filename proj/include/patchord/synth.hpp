#pragma once

#include <cstdint>

#include "patchord/core.hpp"

namespace patchord {

// Full b x b blocks on the block diagonal plus a full first block row and
// first block column (arms point up-left; the corner block is counted once).
SparsePattern gen_arrowhead(index_t n, index_t b);

// Row i holds columns i - floor(w/2) .. i + ceil(w/2) - 1 clipped to bounds,
// w = nnz_per_row; edge rows hold fewer entries.
SparsePattern gen_banded(index_t n, index_t nnz_per_row);

// Per row, nnz_per_row distinct uniformly random columns.
SparsePattern gen_scattered(index_t n, index_t nnz_per_row, std::uint64_t seed);

// Cluster centers uniform in [0, center_spread]^dim; point p belongs to
// cluster p mod n_clusters and is drawn isotropic Gaussian around its center.
PointSet gen_gaussian_mixture(index_t n_points, index_t dim, index_t n_clusters,
                              double center_spread, double cluster_sigma, std::uint64_t seed);

}  // namespace patchord
