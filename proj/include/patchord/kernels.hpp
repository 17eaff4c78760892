#pragma once

#include <functional>
#include <string>
#include <vector>

#include "patchord/core.hpp"
#include "patchord/hier.hpp"
#include "patchord/knn.hpp"

namespace patchord {

// Dense vector plus the name of the permutation it is laid out under.  An
// empty tag means "unspecified" and matches anything.
struct TaggedVector {
  std::vector<double> values;
  std::string ordering;
};
using ChargeVector = TaggedVector;     // x, over sources
using PotentialVector = TaggedVector;  // y, over targets

// y = A x with rows accumulated in canonical entry order.
PotentialVector spmv_flat(const SparseMatrix& m, const ChargeVector& x);

// Recursive block descent; output is laid out (and tagged) in the row tree's
// leaf order.  Traversal order is fixed: top blocks in arena order, children
// (row, col)-ascending, leaf payload row-major.
PotentialVector spmv_hier(const HierBlockMatrix& h, const ChargeVector& x);

// Same result bit-for-bit under any worker count: top-level target-cluster
// block rows are handed out through a work queue, each owning a disjoint
// output segment traversed in the sequential order.
PotentialVector spmv_hier_parallel(const HierBlockMatrix& h, const ChargeVector& x,
                                   index_t workers);

// One attractive-force evaluation: rescales the stored affinities in place to
// a_ij = p_ij / (1 + ||y_i - y_j||^2) and returns per-point forces
// F_i = sum_j a_ij (y_i - y_j), computed as r .* y - A y with r = A 1.
PointSet tsne_attractive_step(HierBlockMatrix& h, const PointSet& y, index_t dim_out);

struct MeanShiftState {
  PointSet sources;   // fixed
  PointSet targets;   // current means
  double bandwidth = 0.0;
  index_t k = 0;
  KnnGraph knn;       // against a <= refresh_period-old target snapshot
  index_t refresh_period = 10;
  index_t iteration = 0;
  bool reorder_on_refresh = false;
};

MeanShiftState meanshift_init(PointSet sources, PointSet targets, double bandwidth, index_t k,
                              index_t refresh_period = 10, bool reorder_on_refresh = false);

// One weighted-mean shift of every target over its current kNN sources,
// w_ij = exp(-||y_i - s_j||^2 / (2 h^2)).  Refreshes (and optionally
// tree-reorders) the neighbor lists every refresh_period iterations.
MeanShiftState meanshift_step(MeanShiftState state);

// Iterated value-update + multiply: at step kappa the stored values become
// value_fn(kappa)(i, j, old) and the corresponding charge vector is applied.
std::vector<PotentialVector> iterate_interactions(
    HierBlockMatrix& h,
    const std::function<std::function<double(index_t, index_t, double)>(index_t)>& value_fn,
    const std::vector<ChargeVector>& x_seq);

}  // namespace patchord
