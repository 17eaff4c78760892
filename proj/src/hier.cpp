#include "patchord/hier.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

namespace patchord {

namespace {

constexpr index_t kMaxSpan = 65536;  // 16-bit local indices

// Cut nodes of a truncated tree: nodes at depth == cut plus leaves above it.
std::vector<index_t> cut_nodes(const PartitionTree& t, index_t cut) {
  std::vector<index_t> out;
  for (index_t id = 0; id < static_cast<index_t>(t.nodes.size()); ++id) {
    const TreeNode& n = t.nodes[id];
    if (n.depth == cut || (n.is_leaf && n.depth < cut)) out.push_back(id);
  }
  return out;
}

// node's enclosing cluster at the given level (itself when already shallower)
index_t cluster_at(const PartitionTree& t, index_t node, index_t level) {
  while (t.nodes[node].depth > level) node = t.nodes[node].parent;
  return node;
}

bool spans_fit(const PartitionTree& t, index_t cut) {
  for (index_t id : cut_nodes(t, cut))
    if (t.nodes[id].end - t.nodes[id].begin > kMaxSpan) return false;
  return true;
}

}  // namespace

HierBlockMatrix build_hier(const SparseMatrix& m, std::shared_ptr<const PartitionTree> row_tree,
                           std::shared_ptr<const PartitionTree> col_tree, index_t cut_level) {
  if (!row_tree || !col_tree) throw error(errc::invalid_argument, "null partition tree");
  if (row_tree->n_points != m.pattern.n_rows || col_tree->n_points != m.pattern.n_cols)
    throw error(errc::span_mismatch, "tree spans do not match matrix dimensions");

  const index_t depth_r = row_tree->depth(), depth_c = col_tree->depth();
  index_t cut = cut_level;
  if (cut == kAutoCutLevel) {
    const index_t deepest = std::max<index_t>({1, depth_r, depth_c});
    cut = deepest;
    for (index_t l = 1; l <= deepest; ++l)
      if (spans_fit(*row_tree, std::min(l, depth_r)) && spans_fit(*col_tree, std::min(l, depth_c))) {
        cut = l;
        break;
      }
  } else if (cut < 0) {
    throw error(errc::invalid_argument, "cut_level must be >= 0");
  }

  // cluster owning each row / column position under the truncated trees
  auto position_clusters = [&](const PartitionTree& t, index_t n) {
    std::vector<index_t> owner(n, -1);
    for (index_t id : cut_nodes(t, std::min(cut, t.depth()))) {
      const TreeNode& node = t.nodes[id];
      if (node.end - node.begin > kMaxSpan)
        throw error(errc::local_index_overflow,
                    "cluster span " + std::to_string(node.end - node.begin) +
                        " exceeds the 16-bit local index range at cut level " + std::to_string(cut));
      for (index_t pos = node.begin; pos < node.end; ++pos) owner[pos] = id;
    }
    return owner;
  };
  const std::vector<index_t> row_owner = position_clusters(*row_tree, m.pattern.n_rows);
  const std::vector<index_t> col_owner = position_clusters(*col_tree, m.pattern.n_cols);

  HierBlockMatrix h;
  h.n_rows = m.pattern.n_rows;
  h.n_cols = m.pattern.n_cols;
  h.nnz = static_cast<std::int64_t>(m.values.size());
  h.cut_level = cut;
  h.row_tree = std::move(row_tree);
  h.col_tree = std::move(col_tree);

  // leaf blocks: bucket the canonical entry stream by cluster pair, which
  // leaves each block's payload sorted row-major for free
  std::map<std::pair<index_t, index_t>, index_t> leaf_ids;
  for (std::size_t e = 0; e < m.values.size(); ++e) {
    const auto [i, j] = m.pattern.entries[e];
    const index_t rn = row_owner[i], cn = col_owner[j];
    auto [it, inserted] = leaf_ids.try_emplace({rn, cn}, static_cast<index_t>(h.blocks.size()));
    if (inserted) {
      HierBlock b;
      const TreeNode& rnode = h.row_tree->nodes[rn];
      const TreeNode& cnode = h.col_tree->nodes[cn];
      b.level = std::max(rnode.depth, cnode.depth);
      b.row_node = rn;
      b.col_node = cn;
      b.row_offset = rnode.begin;
      b.col_offset = cnode.begin;
      b.is_leaf = true;
      h.blocks.push_back(std::move(b));
    }
    HierBlock& b = h.blocks[it->second];
    b.lr.push_back(static_cast<std::uint16_t>(i - b.row_offset));
    b.lc.push_back(static_cast<std::uint16_t>(j - b.col_offset));
    b.vals.push_back(m.values[e]);
  }

  // internal blocks: walk each leaf block's cluster-pair chain up to level 1
  std::map<std::tuple<index_t, index_t, index_t>, index_t> internal_ids;
  const index_t n_leaf_blocks = static_cast<index_t>(h.blocks.size());
  for (index_t leaf = 0; leaf < n_leaf_blocks; ++leaf) {
    index_t child = leaf;
    for (index_t l = h.blocks[leaf].level - 1; l >= 1; --l) {
      const index_t rn = cluster_at(*h.row_tree, h.blocks[leaf].row_node, l);
      const index_t cn = cluster_at(*h.col_tree, h.blocks[leaf].col_node, l);
      auto [it, inserted] = internal_ids.try_emplace({l, rn, cn},
                                                     static_cast<index_t>(h.blocks.size()));
      if (inserted) {
        HierBlock b;
        b.level = l;
        b.row_node = rn;
        b.col_node = cn;
        b.row_offset = h.row_tree->nodes[rn].begin;
        b.col_offset = h.col_tree->nodes[cn].begin;
        b.is_leaf = false;
        h.blocks.push_back(std::move(b));
      }
      h.blocks[it->second].children.push_back(child);
      child = it->second;
      if (!inserted) break;  // the rest of the chain is already linked
    }
  }

  // canonical arena order: by level, then cluster position
  std::vector<index_t> order(h.blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    const HierBlock &x = h.blocks[a], &y = h.blocks[b];
    return std::tuple(x.level, x.row_offset, x.col_offset) <
           std::tuple(y.level, y.row_offset, y.col_offset);
  });
  std::vector<index_t> new_id(h.blocks.size());
  for (index_t pos = 0; pos < static_cast<index_t>(order.size()); ++pos) new_id[order[pos]] = pos;
  std::vector<HierBlock> sorted;
  sorted.reserve(h.blocks.size());
  for (index_t old : order) sorted.push_back(std::move(h.blocks[old]));
  h.blocks = std::move(sorted);
  for (HierBlock& b : h.blocks) {
    for (index_t& c : b.children) c = new_id[c];
    std::sort(b.children.begin(), b.children.end(), [&](index_t a, index_t bb) {
      return std::pair(h.blocks[a].row_offset, h.blocks[a].col_offset) <
             std::pair(h.blocks[bb].row_offset, h.blocks[bb].col_offset);
    });
  }

  if (!h.blocks.empty()) {
    const index_t min_level = h.blocks.front().level;
    for (index_t id = 0; id < static_cast<index_t>(h.blocks.size()); ++id)
      if (h.blocks[id].level == min_level) h.top_blocks.push_back(id);
  }
  return h;
}

HierBlockMatrix build_hier_flat(const SparseMatrix& m) {
  auto single_cluster = [](index_t n) {
    PartitionTree t;
    t.dim = 1;
    t.leaf_capacity = n;
    t.max_depth = 1;
    t.n_points = n;
    TreeNode root;
    root.end = n;
    root.is_leaf = true;
    t.nodes.push_back(std::move(root));
    t.leaf_order = identity_permutation(n);
    return std::make_shared<const PartitionTree>(std::move(t));
  };
  return build_hier(m, single_cluster(m.pattern.n_rows), single_cluster(m.pattern.n_cols));
}

SparseMatrix flatten(const HierBlockMatrix& h) {
  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(h.nnz));
  for (const HierBlock& b : h.blocks) {
    if (!b.is_leaf) continue;
    for (std::size_t e = 0; e < b.vals.size(); ++e)
      entries.emplace_back(b.row_offset + b.lr[e], b.col_offset + b.lc[e], b.vals[e]);
  }
  return csr_from_coo(entries, h.n_rows, h.n_cols);
}

namespace {

template <typename Fn>
void visit_blocks(const HierBlockMatrix& h, index_t id, Fn&& fn) {
  fn(id);
  for (index_t c : h.blocks[id].children) visit_blocks(h, c, fn);
}

}  // namespace

index_t update_values(HierBlockMatrix& h,
                      const std::function<double(index_t, index_t, double)>& f) {
  index_t updated = 0;
  for (index_t top : h.top_blocks)
    visit_blocks(h, top, [&](index_t id) {
      HierBlock& b = h.blocks[id];
      if (!b.is_leaf) return;
      for (std::size_t e = 0; e < b.vals.size(); ++e) {
        const double v = f(b.row_offset + b.lr[e], b.col_offset + b.lc[e], b.vals[e]);
        if (!std::isfinite(v))
          throw error(errc::non_finite_value,
                      "update produced a non-finite value at (" +
                          std::to_string(b.row_offset + b.lr[e]) + "," +
                          std::to_string(b.col_offset + b.lc[e]) + ")");
        b.vals[e] = v;
        ++updated;
      }
    });
  return updated;
}

// ---- HBM1 binary dump ----

namespace {

static_assert(std::endian::native == std::endian::little,
              "HBM1 I/O assumes a little-endian host");

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw error(errc::malformed_record, "truncated HBM1 file " + path);
  return v;
}

void dump_tree(std::ofstream& out, const PartitionTree& t) {
  put<std::uint32_t>(out, t.dim);
  put<std::uint32_t>(out, t.leaf_capacity);
  put<std::uint32_t>(out, t.max_depth);
  put<std::uint32_t>(out, t.n_points);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.nodes.size()));
  for (const TreeNode& n : t.nodes) {
    for (index_t a = 0; a < t.dim; ++a) put<double>(out, n.lo[a]);
    for (index_t a = 0; a < t.dim; ++a) put<double>(out, n.hi[a]);
    put<std::uint32_t>(out, n.begin);
    put<std::uint32_t>(out, n.end);
    put<std::uint32_t>(out, n.depth);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n.parent + 1));
    put<std::uint8_t>(out, n.is_leaf ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n.children.size()));
    for (index_t c : n.children) put<std::uint32_t>(out, c);
  }
  for (index_t v : t.leaf_order.forward) put<std::uint32_t>(out, v);
}

PartitionTree load_tree(std::ifstream& in, const std::string& path) {
  PartitionTree t;
  t.dim = get<std::uint32_t>(in, path);
  t.leaf_capacity = get<std::uint32_t>(in, path);
  t.max_depth = get<std::uint32_t>(in, path);
  t.n_points = get<std::uint32_t>(in, path);
  const std::uint32_t n_nodes = get<std::uint32_t>(in, path);
  t.nodes.resize(n_nodes);
  for (TreeNode& n : t.nodes) {
    for (index_t a = 0; a < t.dim; ++a) n.lo[a] = get<double>(in, path);
    for (index_t a = 0; a < t.dim; ++a) n.hi[a] = get<double>(in, path);
    n.begin = get<std::uint32_t>(in, path);
    n.end = get<std::uint32_t>(in, path);
    n.depth = get<std::uint32_t>(in, path);
    n.parent = static_cast<index_t>(get<std::uint32_t>(in, path)) - 1;
    n.is_leaf = get<std::uint8_t>(in, path) != 0;
    n.children.resize(get<std::uint32_t>(in, path));
    for (index_t& c : n.children) c = get<std::uint32_t>(in, path);
  }
  std::vector<index_t> forward(t.n_points);
  for (index_t& v : forward) v = get<std::uint32_t>(in, path);
  t.leaf_order = make_permutation(std::move(forward));
  return t;
}

}  // namespace

void dump_hbm1(const HierBlockMatrix& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  out.write("HBM1", 4);
  put<std::uint32_t>(out, h.n_rows);
  put<std::uint32_t>(out, h.n_cols);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(h.nnz));
  index_t levels = 0;
  for (const HierBlock& b : h.blocks) levels = std::max(levels, static_cast<index_t>(b.level + 1));
  put<std::uint32_t>(out, levels);
  put<std::uint32_t>(out, h.cut_level);
  dump_tree(out, *h.row_tree);
  dump_tree(out, *h.col_tree);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.blocks.size()));
  for (const HierBlock& b : h.blocks) {  // arena is already grouped level by level
    put<std::uint32_t>(out, b.level);
    put<std::uint32_t>(out, b.row_node);
    put<std::uint32_t>(out, b.col_node);
    put<std::uint8_t>(out, b.is_leaf ? 1 : 0);
    if (b.is_leaf) {
      put<std::uint64_t>(out, b.vals.size());
      for (std::uint16_t v : b.lr) put<std::uint16_t>(out, v);
      for (std::uint16_t v : b.lc) put<std::uint16_t>(out, v);
      for (double v : b.vals) put<double>(out, v);
    } else {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(b.children.size()));
      for (index_t c : b.children) put<std::uint32_t>(out, c);
    }
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.top_blocks.size()));
  for (index_t t : h.top_blocks) put<std::uint32_t>(out, t);
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

HierBlockMatrix load_hbm1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HBM1", 4) != 0)
    throw error(errc::malformed_record, "missing HBM1 magic in " + path);
  HierBlockMatrix h;
  h.n_rows = get<std::uint32_t>(in, path);
  h.n_cols = get<std::uint32_t>(in, path);
  h.nnz = static_cast<std::int64_t>(get<std::uint64_t>(in, path));
  get<std::uint32_t>(in, path);  // levels, derivable from the blocks
  h.cut_level = get<std::uint32_t>(in, path);
  auto row_tree = std::make_shared<PartitionTree>(load_tree(in, path));
  auto col_tree = std::make_shared<PartitionTree>(load_tree(in, path));
  const std::uint32_t n_blocks = get<std::uint32_t>(in, path);
  h.blocks.resize(n_blocks);
  for (HierBlock& b : h.blocks) {
    b.level = get<std::uint32_t>(in, path);
    b.row_node = get<std::uint32_t>(in, path);
    b.col_node = get<std::uint32_t>(in, path);
    b.row_offset = row_tree->nodes[b.row_node].begin;
    b.col_offset = col_tree->nodes[b.col_node].begin;
    b.is_leaf = get<std::uint8_t>(in, path) != 0;
    if (b.is_leaf) {
      const std::uint64_t nv = get<std::uint64_t>(in, path);
      b.lr.resize(nv);
      b.lc.resize(nv);
      b.vals.resize(nv);
      for (std::uint16_t& v : b.lr) v = get<std::uint16_t>(in, path);
      for (std::uint16_t& v : b.lc) v = get<std::uint16_t>(in, path);
      for (double& v : b.vals) v = get<double>(in, path);
    } else {
      b.children.resize(get<std::uint32_t>(in, path));
      for (index_t& c : b.children) c = get<std::uint32_t>(in, path);
    }
  }
  h.top_blocks.resize(get<std::uint32_t>(in, path));
  for (index_t& t : h.top_blocks) t = get<std::uint32_t>(in, path);
  h.row_tree = std::move(row_tree);
  h.col_tree = std::move(col_tree);
  return h;
}

}  // namespace patchord
