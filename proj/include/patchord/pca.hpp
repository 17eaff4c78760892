#pragma once

#include <cstdint>

#include "patchord/core.hpp"

namespace patchord {

struct Embedding {
  index_t dim_in = 0;
  index_t dim_out = 0;
  std::vector<double> mean;             // dim_in
  std::vector<double> axes;             // dim_out x dim_in, row per axis, orthonormal
  std::vector<double> singular_values;  // dim_out, non-increasing
  double total_sq_norm = 0.0;           // squared Frobenius norm of the centered data
  bool converged = false;               // subspace iteration metadata
  index_t iterations = 0;

  const double* axis(index_t a) const { return axes.data() + static_cast<std::size_t>(a) * dim_in; }
};

// Top-d principal axes of the centered data via blocked subspace iteration
// on the covariance action.  Deterministic for a fixed seed.  When d equals
// the input dimension the embedding is exact: axis-aligned directions ordered
// by decreasing column variance (the identity-minus-centering case).
Embedding fit_pca(const PointSet& points, index_t d, double tol = 1e-9, index_t max_iter = 1000,
                  std::uint64_t seed = 1);

// coordinate a of point x = <x - mean, axes[a]>
PointSet project(const PointSet& points, const Embedding& e);

// sum of squared singular values over the centered squared Frobenius norm
double variance_ratio(const Embedding& e);

// smallest d <= d_max with variance_ratio >= ratio_tol, else d_max
index_t choose_dim(const PointSet& points, double ratio_tol, index_t d_max);

}  // namespace patchord
