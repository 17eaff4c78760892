#pragma once

#include "patchord/core.hpp"

namespace patchord {

// Row i lists the k nearest sources to target i, ascending by squared
// Euclidean distance, ties broken by ascending source index.
struct KnnGraph {
  index_t k = 0;
  index_t n_targets = 0;
  index_t n_sources = 0;
  std::vector<index_t> neighbor_ids;    // n_targets x k
  std::vector<double> neighbor_dists;   // squared distances, same layout

  const index_t* ids(index_t i) const { return neighbor_ids.data() + static_cast<std::size_t>(i) * k; }
  const double* dists(index_t i) const { return neighbor_dists.data() + static_cast<std::size_t>(i) * k; }
};

// Exact brute-force kNN.  Self matches are excluded only when targets and
// sources are the same object (identity, not value equality).
KnnGraph build_knn(const PointSet& targets, const PointSet& sources, index_t k);

// Entry (i, j) iff j is in neighbor row i; nnz = M * k.
SparsePattern pattern_from_knn(const KnnGraph& g);

// Structural union of p and its transpose.
SparsePattern symmetrize(const SparsePattern& p);

// value at (i, j) = exp(-|t_i - s_j|^2 / (2 h^2))
SparseMatrix gaussian_values(const SparsePattern& p, const PointSet& targets,
                             const PointSet& sources, double h);

}  // namespace patchord
