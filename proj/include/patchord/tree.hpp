#pragma once

#include <array>

#include "patchord/core.hpp"

namespace patchord {

struct TreeNode {
  std::array<double, 3> lo{};  // cube bounds, first `dim` entries used
  std::array<double, 3> hi{};
  index_t begin = 0, end = 0;  // half-open span of leaf-order positions
  index_t depth = 0;
  index_t parent = -1;
  bool is_leaf = false;
  std::vector<index_t> children;  // node ids, ascending orthant code
};

// Adaptive 2^dim partition tree over an embedded point set.  The root box is
// the bounding box expanded to a cube; nodes split at the box center; empty
// orthants are omitted; points keep original-index order within leaves.
struct PartitionTree {
  index_t dim = 0;
  index_t leaf_capacity = 0;
  index_t max_depth = 0;
  index_t n_points = 0;
  std::vector<TreeNode> nodes;  // pre-order, root first
  Permutation leaf_order;       // forward[original index] = DFS position

  index_t depth() const {
    index_t d = 0;
    for (const TreeNode& n : nodes) d = std::max(d, n.depth);
    return d;
  }
};

PartitionTree build_tree(const PointSet& points_embedded, index_t leaf_capacity,
                         index_t max_depth);

// Cluster boundary offsets (prefix positions in leaf order) of all nodes at
// the given level; leaves shallower than the level count as their own cluster.
std::vector<index_t> level_blocking(const PartitionTree& t, index_t level);

}  // namespace patchord
