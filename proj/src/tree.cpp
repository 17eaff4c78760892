#include "patchord/tree.hpp"

#include <algorithm>

namespace patchord {

namespace {

struct TreeBuilder {
  const PointSet& pts;
  PartitionTree& tree;
  std::vector<index_t> order;  // order[position] = original index, refined in place
  std::vector<index_t> scratch;

  void split(index_t node_id, index_t lo, index_t hi, index_t depth) {
    TreeNode& node = tree.nodes[node_id];  // note: reference invalidated by push_back below
    node.begin = lo;
    node.end = hi;
    node.depth = depth;
    if (hi - lo <= tree.leaf_capacity || depth >= tree.max_depth) {
      tree.nodes[node_id].is_leaf = true;
      return;
    }
    const index_t dim = tree.dim;
    const index_t n_orthants = index_t{1} << dim;
    std::array<double, 3> center;
    for (index_t a = 0; a < dim; ++a) center[a] = 0.5 * (node.lo[a] + node.hi[a]);

    auto orthant_of = [&](index_t original) {
      const double* x = pts.point(original);
      index_t code = 0;
      for (index_t a = 0; a < dim; ++a)
        if (x[a] >= center[a]) code |= index_t{1} << a;
      return code;
    };

    // stable bucket partition by orthant code
    std::array<index_t, 9> start{};
    for (index_t i = lo; i < hi; ++i) ++start[orthant_of(order[i]) + 1];
    for (index_t c = 0; c < n_orthants; ++c) start[c + 1] += start[c];
    std::array<index_t, 9> fill = start;
    for (index_t i = lo; i < hi; ++i) scratch[lo + fill[orthant_of(order[i])]++] = order[i];
    std::copy(scratch.begin() + lo, scratch.begin() + hi, order.begin() + lo);

    std::array<double, 3> parent_lo = node.lo, parent_hi = node.hi;
    for (index_t code = 0; code < n_orthants; ++code) {
      index_t c_lo = lo + start[code], c_hi = lo + start[code + 1];
      if (c_lo == c_hi) continue;
      index_t child_id = static_cast<index_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& child = tree.nodes.back();
      child.parent = node_id;
      for (index_t a = 0; a < dim; ++a) {
        const bool high = (code >> a) & 1;
        child.lo[a] = high ? center[a] : parent_lo[a];
        child.hi[a] = high ? parent_hi[a] : center[a];
      }
      tree.nodes[node_id].children.push_back(child_id);
      split(child_id, c_lo, c_hi, depth + 1);
    }
  }
};

}  // namespace

PartitionTree build_tree(const PointSet& points_embedded, index_t leaf_capacity,
                         index_t max_depth) {
  const index_t dim = points_embedded.dim, n = points_embedded.n_points;
  if (dim < 1 || dim > 3)
    throw error(errc::dim_too_high, "partition tree supports dim 1..3, got " + std::to_string(dim));
  if (leaf_capacity < 1) throw error(errc::invalid_argument, "leaf_capacity must be >= 1");
  if (max_depth < 1) throw error(errc::invalid_argument, "max_depth must be >= 1");

  PartitionTree tree;
  tree.dim = dim;
  tree.leaf_capacity = leaf_capacity;
  tree.max_depth = max_depth;
  tree.n_points = n;
  tree.nodes.emplace_back();

  // root box: bounding box expanded to a cube, centered
  std::array<double, 3> lo{}, hi{};
  for (index_t a = 0; a < dim; ++a) {
    lo[a] = n > 0 ? points_embedded.point(0)[a] : 0.0;
    hi[a] = lo[a];
  }
  for (index_t i = 1; i < n; ++i) {
    const double* x = points_embedded.point(i);
    for (index_t a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  double side = 0.0;
  for (index_t a = 0; a < dim; ++a) side = std::max(side, hi[a] - lo[a]);
  for (index_t a = 0; a < dim; ++a) {
    const double center = 0.5 * (lo[a] + hi[a]);
    tree.nodes[0].lo[a] = center - 0.5 * side;
    tree.nodes[0].hi[a] = center + 0.5 * side;
  }

  TreeBuilder builder{points_embedded, tree, {}, {}};
  builder.order.resize(n);
  builder.scratch.resize(n);
  for (index_t i = 0; i < n; ++i) builder.order[i] = i;
  builder.split(0, 0, n, 0);

  std::vector<index_t> forward(n);
  for (index_t pos = 0; pos < n; ++pos) forward[builder.order[pos]] = pos;
  tree.leaf_order = make_permutation(std::move(forward));
  return tree;
}

std::vector<index_t> level_blocking(const PartitionTree& t, index_t level) {
  if (level < 0 || level > t.depth())
    throw error(errc::level_out_of_range,
                "level " + std::to_string(level) + " exceeds tree depth " + std::to_string(t.depth()));
  std::vector<index_t> offsets;
  for (const TreeNode& n : t.nodes)
    if (n.depth == level || (n.is_leaf && n.depth < level)) offsets.push_back(n.begin);
  offsets.push_back(t.n_points);
  std::sort(offsets.begin(), offsets.end());
  return offsets;
}

}  // namespace patchord
