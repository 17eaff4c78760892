#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "patchord/core.hpp"
#include "patchord/tree.hpp"

namespace patchord {

struct OrderingResult {
  std::string scheme;
  Permutation row_perm;
  Permutation col_perm;
  std::shared_ptr<const PartitionTree> row_tree;  // present for tree schemes
  std::shared_ptr<const PartitionTree> col_tree;
};

// Uniformly random permutation, deterministic per seed.
Permutation order_scattered(index_t n, std::uint64_t seed);

// Reverse Cuthill-McKee.  The pattern is symmetrized internally (structural
// union with its transpose, diagonal ignored).  Per connected component:
// pseudo-peripheral start via the repeated-BFS heuristic, BFS visiting
// neighbors in ascending (degree, index) order, then the component's order is
// reversed.  Components are processed in ascending smallest-original-index.
Permutation order_rcm(const SparsePattern& p);

// Each axis quantized into g equal-width bins over its observed range; points
// sorted lexicographically by the bin tuple, ties broken by the raw coordinate
// of the last axis, then original index.  For dim = 1 the sort is by raw
// coordinate (g ignored).
Permutation order_lexical(const PointSet& points_embedded, index_t bins_per_axis);

// Builds a partition tree over the points and returns its leaf order as both
// row and column permutation (dual tree: call twice for distinct sets).
OrderingResult order_tree(const PointSet& points_embedded, index_t leaf_capacity = 128,
                          index_t max_depth = 12);

// Text serialization: first line n, then n forward indices, one per line.
void write_permutation(const Permutation& p, const std::string& path);
Permutation read_permutation(const std::string& path);

}  // namespace patchord
