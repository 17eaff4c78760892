#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "patchord/hier.hpp"
#include "patchord/knn.hpp"
#include "patchord/orderings.hpp"

using namespace patchord;

namespace {

SparseMatrix random_matrix(index_t n_rows, index_t n_cols, index_t target_nnz,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::pair<index_t, index_t>> seen;
  std::vector<std::tuple<index_t, index_t, double>> entries;
  while (static_cast<index_t>(entries.size()) < target_nnz) {
    const index_t i = static_cast<index_t>(rng.bounded(static_cast<std::uint64_t>(n_rows)));
    const index_t j = static_cast<index_t>(rng.bounded(static_cast<std::uint64_t>(n_cols)));
    if (seen.insert({i, j}).second) entries.emplace_back(i, j, rng.normal());
  }
  return csr_from_coo(entries, n_rows, n_cols);
}

std::shared_ptr<const PartitionTree> tree_over_random_points(index_t n, index_t dim,
                                                             index_t leaf_capacity,
                                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coords(static_cast<std::size_t>(n) * dim);
  for (double& c : coords) c = rng.normal();
  return std::make_shared<PartitionTree>(
      build_tree(make_point_set(n, dim, coords), leaf_capacity, 12));
}

bool same_matrix(const SparseMatrix& a, const SparseMatrix& b) {
  return a.pattern.n_rows == b.pattern.n_rows && a.pattern.n_cols == b.pattern.n_cols &&
         a.pattern.entries == b.pattern.entries && a.values == b.values;
}

}  // namespace

TEST_CASE("build_hier_flat stores the whole matrix as one leaf block") {
  const SparseMatrix m = csr_from_coo({{0, 1, 2.5}, {2, 0, -1.0}, {1, 1, 0.5}}, 3, 3);
  const HierBlockMatrix h = build_hier_flat(m);
  REQUIRE(h.blocks.size() == 1);
  const HierBlock& b = h.blocks[0];
  CHECK(b.is_leaf);
  CHECK(b.row_offset == 0);
  CHECK(b.col_offset == 0);
  CHECK(b.vals.size() == 3);
  CHECK(h.top_blocks == std::vector<index_t>{0});
  CHECK(h.nnz == 3);
  CHECK(same_matrix(flatten(h), m));
}

TEST_CASE("build_hier with root-only trees matches the flat degenerate case") {
  const SparseMatrix m = random_matrix(20, 20, 60, 5);
  const auto t = tree_over_random_points(20, 2, 64, 1);  // capacity > n: root only
  REQUIRE(t->depth() == 0);
  const HierBlockMatrix h = build_hier(m, t, t, 1);
  REQUIRE(h.blocks.size() == 1);
  CHECK(h.blocks[0].is_leaf);
  CHECK(h.blocks[0].level == 0);
  CHECK(same_matrix(flatten(h), m));
}

TEST_CASE("level-1 cut on a quadrant-clustered pattern keeps only nonzero blocks") {
  // four tight clusters, one per quadrant; pattern connects points only
  // within their own cluster, so only the four diagonal blocks exist
  Rng rng(11);
  const index_t n = 40;
  std::vector<double> coords;
  for (index_t i = 0; i < n; ++i) {
    const index_t c = i % 4;
    coords.push_back((c & 1 ? 10.0 : -10.0) + 0.1 * rng.normal());
    coords.push_back((c & 2 ? 10.0 : -10.0) + 0.1 * rng.normal());
  }
  const PointSet pts = make_point_set(n, 2, coords);
  const OrderingResult ord = order_tree(pts, 10, 12);
  std::vector<std::tuple<index_t, index_t, double>> entries;
  for (index_t i = 0; i < n; ++i)
    for (index_t j = i % 4; j < n; j += 4) entries.emplace_back(i, j, 1.0);
  SparseMatrix m = csr_from_coo(entries, n, n);
  m = permute(m, ord.row_perm, ord.col_perm);

  const HierBlockMatrix h = build_hier(m, ord.row_tree, ord.col_tree, 1);
  index_t leaves = 0;
  for (const HierBlock& b : h.blocks)
    if (b.is_leaf) {
      ++leaves;
      CHECK(b.vals.size() == 100);  // 10x10 dense cluster
      CHECK(b.row_offset == b.col_offset);
    }
  CHECK(leaves == 4);
  CHECK(same_matrix(flatten(h), m));
}

TEST_CASE("flatten round-trips random matrices at every cut level") {
  const SparseMatrix m = random_matrix(120, 90, 800, 7);
  const auto rt = tree_over_random_points(120, 3, 8, 2);
  const auto ct = tree_over_random_points(90, 3, 8, 3);
  REQUIRE(rt->depth() >= 2);
  for (index_t cut : std::vector<index_t>{0, 1, 2, rt->depth(), kAutoCutLevel}) {
    const HierBlockMatrix h = build_hier(m, rt, ct, cut);
    CHECK(same_matrix(flatten(h), m));
    CHECK(h.nnz == 800);
  }
}

TEST_CASE("leaf blocks tile the matrix: disjoint rectangles covering every entry") {
  const SparseMatrix m = random_matrix(64, 64, 500, 13);
  const auto rt = tree_over_random_points(64, 2, 6, 4);
  const auto ct = tree_over_random_points(64, 2, 6, 5);
  const HierBlockMatrix h = build_hier(m, rt, ct);

  std::int64_t total = 0;
  std::vector<std::array<index_t, 4>> rects;  // r0, r1, c0, c1
  for (const HierBlock& b : h.blocks) {
    if (!b.is_leaf) continue;
    total += static_cast<std::int64_t>(b.vals.size());
    const TreeNode& rn = rt->nodes[b.row_node];
    const TreeNode& cn = ct->nodes[b.col_node];
    CHECK(b.row_offset == rn.begin);
    CHECK(b.col_offset == cn.begin);
    for (std::size_t e = 0; e < b.vals.size(); ++e) {
      CHECK(b.row_offset + b.lr[e] < rn.end);
      CHECK(b.col_offset + b.lc[e] < cn.end);
    }
    // row-major payload order
    for (std::size_t e = 1; e < b.vals.size(); ++e)
      CHECK(std::pair(b.lr[e - 1], b.lc[e - 1]) < std::pair(b.lr[e], b.lc[e]));
    CHECK(!b.vals.empty());  // empty blocks never materialized
    rects.push_back({rn.begin, rn.end, cn.begin, cn.end});
  }
  CHECK(total == h.nnz);
  for (std::size_t a = 0; a < rects.size(); ++a)
    for (std::size_t b2 = a + 1; b2 < rects.size(); ++b2) {
      const bool row_overlap = rects[a][0] < rects[b2][1] && rects[b2][0] < rects[a][1];
      const bool col_overlap = rects[a][2] < rects[b2][3] && rects[b2][2] < rects[a][3];
      CHECK(!(row_overlap && col_overlap));
    }
}

TEST_CASE("internal blocks chain down to their leaves in (row, col) order") {
  const SparseMatrix m = random_matrix(100, 100, 600, 17);
  const auto t = tree_over_random_points(100, 2, 4, 6);
  REQUIRE(t->depth() >= 3);
  const HierBlockMatrix h = build_hier(m, t, t, t->depth());

  std::vector<char> reachable(h.blocks.size(), 0);
  std::vector<index_t> stack(h.top_blocks.begin(), h.top_blocks.end());
  while (!stack.empty()) {
    const index_t id = stack.back();
    stack.pop_back();
    reachable[id] = 1;
    const HierBlock& b = h.blocks[id];
    if (b.is_leaf) {
      CHECK(b.children.empty());
      continue;
    }
    CHECK(!b.children.empty());
    for (std::size_t q = 0; q < b.children.size(); ++q) {
      const HierBlock& child = h.blocks[b.children[q]];
      CHECK(child.level == b.level + 1);
      if (q > 0) {
        const HierBlock& prev = h.blocks[b.children[q - 1]];
        CHECK(std::pair(prev.row_offset, prev.col_offset) <
              std::pair(child.row_offset, child.col_offset));
      }
      stack.push_back(b.children[q]);
    }
  }
  for (char r : reachable) CHECK(r == 1);  // no orphan blocks in the arena
}

TEST_CASE("build_hier rejects mismatched tree spans") {
  const SparseMatrix m = random_matrix(10, 10, 20, 19);
  const auto good = tree_over_random_points(10, 1, 4, 7);
  const auto bad = tree_over_random_points(11, 1, 4, 8);
  try {
    build_hier(m, bad, good);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::span_mismatch);
  }
  try {
    build_hier(m, good, bad);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::span_mismatch);
  }
  CHECK_THROWS_AS(build_hier(m, good, good, -7), error);
}

TEST_CASE("cluster spans wider than 16-bit local indices are rejected") {
  const index_t n = 65537;
  std::vector<double> coords(n);
  for (index_t i = 0; i < n; ++i) coords[i] = static_cast<double>(i);
  auto t = std::make_shared<PartitionTree>(
      build_tree(make_point_set(n, 1, coords), n + 1, 12));  // root-only
  const SparseMatrix m = csr_from_coo({{0, 0, 1.0}, {n - 1, n - 1, 2.0}}, n, n);
  try {
    build_hier(m, t, t, 0);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::local_index_overflow);
  }
  CHECK_THROWS_AS(build_hier_flat(m), error);
}

TEST_CASE("auto cut picks the shallowest level whose spans fit") {
  // capacity-1 tree over 70 points: level 1 spans are far below 65536, so
  // the auto cut must stop at level 1 even though the tree runs deeper
  const auto t = tree_over_random_points(70, 2, 1, 9);
  REQUIRE(t->depth() >= 3);
  const SparseMatrix m = random_matrix(70, 70, 200, 23);
  const HierBlockMatrix h = build_hier(m, t, t);
  CHECK(h.cut_level == 1);
  for (const HierBlock& b : h.blocks) CHECK(b.level <= 1);
}

TEST_CASE("update_values with the identity leaves values bit-equal") {
  const SparseMatrix m = random_matrix(50, 50, 300, 29);
  const auto t = tree_over_random_points(50, 2, 8, 10);
  HierBlockMatrix h = build_hier(m, t, t);
  const index_t touched = update_values(h, [](index_t, index_t, double v) { return v; });
  CHECK(touched == 300);
  CHECK(same_matrix(flatten(h), m));
}

TEST_CASE("update_values with a constant writes every entry") {
  const SparseMatrix m = random_matrix(30, 30, 120, 31);
  const auto t = tree_over_random_points(30, 2, 8, 11);
  HierBlockMatrix h = build_hier(m, t, t);
  update_values(h, [](index_t, index_t, double) { return 1.0; });
  const SparseMatrix flat = flatten(h);
  CHECK(flat.pattern.entries == m.pattern.entries);
  for (double v : flat.values) CHECK(v == 1.0);
}

TEST_CASE("update_values visits each coordinate exactly once, deterministically") {
  const SparseMatrix m = random_matrix(40, 40, 200, 37);
  const auto t = tree_over_random_points(40, 2, 6, 12);
  HierBlockMatrix h = build_hier(m, t, t);

  std::vector<std::pair<index_t, index_t>> visited;
  update_values(h, [&](index_t i, index_t j, double v) {
    visited.emplace_back(i, j);
    return v;
  });
  CHECK(visited.size() == 200);
  std::vector<std::pair<index_t, index_t>> sorted = visited;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == m.pattern.entries);  // each entry exactly once

  std::vector<std::pair<index_t, index_t>> again;
  update_values(h, [&](index_t i, index_t j, double v) {
    again.emplace_back(i, j);
    return v;
  });
  CHECK(again == visited);
}

TEST_CASE("update_values rejects non-finite results") {
  const SparseMatrix m = csr_from_coo({{0, 0, 1.0}}, 2, 2);
  HierBlockMatrix h = build_hier_flat(m);
  try {
    update_values(h, [](index_t, index_t, double) {
      return std::numeric_limits<double>::quiet_NaN();
    });
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::non_finite_value);
  }
}

TEST_CASE("update_values after a point move equals a from-scratch rebuild") {
  Rng rng(43);
  const index_t n = 60;
  std::vector<double> coords(n * 2);
  for (double& c : coords) c = rng.normal() * 3.0;
  PointSet pts = make_point_set(n, 2, coords);
  const OrderingResult ord = order_tree(pts, 8, 12);

  const SparsePattern p = symmetrize(pattern_from_knn(build_knn(pts, pts, 5)));
  SparseMatrix m = gaussian_values(p, pts, pts, 1.0);
  m = permute(m, ord.row_perm, ord.col_perm);
  HierBlockMatrix h = build_hier(m, ord.row_tree, ord.col_tree);

  // move the points, refresh values in place, and compare with a rebuild
  for (double& c : coords) c += 0.25;
  for (index_t i = 0; i < n; ++i) coords[i * 2] *= 1.1;
  const PointSet moved = make_point_set(n, 2, coords);
  const PointSet moved_perm = permute(moved, ord.row_perm);
  auto kernel = [&](index_t i, index_t j, double) {
    const double* a = moved_perm.point(i);
    const double* b = moved_perm.point(j);
    const double d2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
    return std::exp(-d2 / 2.0);
  };
  update_values(h, kernel);

  SparseMatrix rebuilt = flatten(h);  // pattern carrier; recompute values directly
  for (std::size_t e = 0; e < rebuilt.values.size(); ++e)
    rebuilt.values[e] = kernel(rebuilt.pattern.entries[e].first,
                               rebuilt.pattern.entries[e].second, 0.0);
  CHECK(same_matrix(flatten(h), rebuilt));
}

TEST_CASE("HBM1 files round-trip the full structure") {
  const SparseMatrix m = random_matrix(80, 80, 400, 47);
  const auto t = tree_over_random_points(80, 3, 8, 13);
  HierBlockMatrix h = build_hier(m, t, t);
  h.row_tag = h.col_tag = "tree3";

  const std::string path = "roundtrip.hbm1";
  dump_hbm1(h, path);
  const HierBlockMatrix back = load_hbm1(path);
  std::remove(path.c_str());

  CHECK(back.n_rows == h.n_rows);
  CHECK(back.n_cols == h.n_cols);
  CHECK(back.nnz == h.nnz);
  CHECK(back.cut_level == h.cut_level);
  CHECK(back.top_blocks == h.top_blocks);
  REQUIRE(back.blocks.size() == h.blocks.size());
  for (std::size_t i = 0; i < h.blocks.size(); ++i) {
    CHECK(back.blocks[i].level == h.blocks[i].level);
    CHECK(back.blocks[i].is_leaf == h.blocks[i].is_leaf);
    CHECK(back.blocks[i].row_offset == h.blocks[i].row_offset);
    CHECK(back.blocks[i].col_offset == h.blocks[i].col_offset);
    CHECK(back.blocks[i].children == h.blocks[i].children);
    CHECK(back.blocks[i].lr == h.blocks[i].lr);
    CHECK(back.blocks[i].lc == h.blocks[i].lc);
    CHECK(back.blocks[i].vals == h.blocks[i].vals);
  }
  REQUIRE(back.row_tree != nullptr);
  CHECK(back.row_tree->leaf_order.forward == t->leaf_order.forward);
  CHECK(back.row_tree->nodes.size() == t->nodes.size());
  CHECK(same_matrix(flatten(back), flatten(h)));
}

TEST_CASE("load_hbm1 reports missing files and bad magic") {
  try {
    load_hbm1("no_such.hbm1");
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::io_error);
  }

  const std::string bogus = "bogus.hbm1";
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "NOPE garbage";
  }
  try {
    load_hbm1(bogus);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::malformed_record);
  }
  std::remove(bogus.c_str());
}
