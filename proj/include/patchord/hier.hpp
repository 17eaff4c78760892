#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "patchord/core.hpp"
#include "patchord/tree.hpp"

namespace patchord {

// One block of the hierarchy.  Internal blocks hold child references only;
// leaf blocks hold the entries with 16-bit cluster-local indices.
struct HierBlock {
  index_t level = 0;             // cluster level (tree depth) of this block
  index_t row_node = -1;         // node ids in the row / column trees
  index_t col_node = -1;
  index_t row_offset = 0;        // cluster span starts
  index_t col_offset = 0;
  bool is_leaf = false;
  std::vector<index_t> children;      // arena ids, ordered (row, col)
  std::vector<std::uint16_t> lr, lc;  // leaf payload, sorted row-major
  std::vector<double> vals;
};

struct HierBlockMatrix {
  index_t n_rows = 0, n_cols = 0;
  std::int64_t nnz = 0;
  index_t cut_level = 0;
  std::shared_ptr<const PartitionTree> row_tree, col_tree;
  std::vector<HierBlock> blocks;     // grouped by level, (row, col)-sorted within
  std::vector<index_t> top_blocks;   // roots of the block forest, (row, col)-sorted
  std::string row_tag, col_tag;      // ordering tags checked against vectors
};

inline constexpr index_t kAutoCutLevel = -1;

// Builds the blocked storage for a matrix already permuted into the trees'
// leaf orders.  cut_level bounds the hierarchy depth: leaf blocks live at
// cut_level, tree leaves shallower than that become leaf blocks at their own
// depth.  kAutoCutLevel picks the shallowest level (>= 1) at which every
// cluster span of both trees fits the 16-bit local index width (65536).
HierBlockMatrix build_hier(const SparseMatrix& m, std::shared_ptr<const PartitionTree> row_tree,
                           std::shared_ptr<const PartitionTree> col_tree,
                           index_t cut_level = kAutoCutLevel);

// CSB-flat degenerate case: the whole matrix as one leaf block under
// single-cluster trees (requires both dimensions <= 65536).
HierBlockMatrix build_hier_flat(const SparseMatrix& m);

// Canonical SparseMatrix with the identical pattern and bit-equal values.
SparseMatrix flatten(const HierBlockMatrix& h);

// Replaces every stored value by f(global_row, global_col, old_value),
// traversing blocks in hierarchy order, then local row-major.  Returns the
// number of entries updated.
index_t update_values(HierBlockMatrix& h,
                      const std::function<double(index_t, index_t, double)>& f);

// Binary dump ("HBM1", little-endian); layout documented in docs/hbm1-format.md.
void dump_hbm1(const HierBlockMatrix& h, const std::string& path);
HierBlockMatrix load_hbm1(const std::string& path);

}  // namespace patchord
