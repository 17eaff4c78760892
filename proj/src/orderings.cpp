#include "patchord/orderings.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

namespace patchord {

Permutation order_scattered(index_t n, std::uint64_t seed) {
  if (n < 1) throw error(errc::invalid_argument, "n must be >= 1");
  std::vector<index_t> forward(n);
  for (index_t i = 0; i < n; ++i) forward[i] = i;
  Rng rng(seed);
  rng.shuffle(forward);
  return make_permutation(std::move(forward));
}

namespace {

struct AdjGraph {
  std::vector<index_t> ptr, adj, degree;
};

AdjGraph symmetric_adjacency(const SparsePattern& p) {
  std::vector<std::pair<index_t, index_t>> edges;
  edges.reserve(p.entries.size() * 2);
  for (const auto& [i, j] : p.entries) {
    if (i == j) continue;
    edges.emplace_back(i, j);
    edges.emplace_back(j, i);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  AdjGraph g;
  g.ptr.assign(static_cast<std::size_t>(p.n_rows) + 1, 0);
  for (const auto& [i, j] : edges) ++g.ptr[i + 1];
  for (index_t r = 0; r < p.n_rows; ++r) g.ptr[r + 1] += g.ptr[r];
  g.adj.resize(edges.size());
  {
    std::vector<index_t> fill(g.ptr.begin(), g.ptr.end() - 1);
    for (const auto& [i, j] : edges) g.adj[fill[i]++] = j;
  }
  g.degree.resize(p.n_rows);
  for (index_t r = 0; r < p.n_rows; ++r) g.degree[r] = g.ptr[r + 1] - g.ptr[r];
  return g;
}

// BFS level structure from root, restricted to root's component.
// Returns (eccentricity, vertices of the last level).
std::pair<index_t, std::vector<index_t>> bfs_levels(const AdjGraph& g, index_t root,
                                                    std::vector<index_t>& level) {
  std::fill(level.begin(), level.end(), -1);
  std::vector<index_t> frontier{root}, next, last;
  level[root] = 0;
  index_t depth = 0;
  while (!frontier.empty()) {
    last = frontier;
    next.clear();
    for (index_t u : frontier)
      for (index_t e = g.ptr[u]; e < g.ptr[u + 1]; ++e) {
        index_t v = g.adj[e];
        if (level[v] == -1) {
          level[v] = depth + 1;
          next.push_back(v);
        }
      }
    frontier.swap(next);
    ++depth;
  }
  return {depth - 1, last};
}

index_t min_degree_vertex(const AdjGraph& g, const std::vector<index_t>& vs) {
  index_t best = vs[0];
  for (index_t v : vs)
    if (g.degree[v] < g.degree[best] || (g.degree[v] == g.degree[best] && v < best)) best = v;
  return best;
}

}  // namespace

Permutation order_rcm(const SparsePattern& p) {
  if (p.n_rows != p.n_cols) throw error(errc::not_square, "rCM needs a square pattern");
  const index_t n = p.n_rows;
  AdjGraph g = symmetric_adjacency(p);

  std::vector<index_t> forward(n, -1);
  std::vector<index_t> level(n);
  std::vector<bool> placed(n, false);
  std::vector<index_t> component, cm;
  index_t next_pos = 0;

  for (index_t seed = 0; seed < n; ++seed) {
    if (placed[seed]) continue;

    // collect the component (scanning from 0 gives ascending min-index order)
    component.clear();
    component.push_back(seed);
    placed[seed] = true;
    for (std::size_t q = 0; q < component.size(); ++q) {
      index_t u = component[q];
      for (index_t e = g.ptr[u]; e < g.ptr[u + 1]; ++e)
        if (!placed[g.adj[e]]) {
          placed[g.adj[e]] = true;
          component.push_back(g.adj[e]);
        }
    }

    // pseudo-peripheral start: repeated BFS toward a deepest last level
    index_t start = min_degree_vertex(g, component);
    auto [ecc, last] = bfs_levels(g, start, level);
    while (true) {
      index_t cand = min_degree_vertex(g, last);
      auto [ecc2, last2] = bfs_levels(g, cand, level);
      if (ecc2 > ecc) {
        start = cand;
        ecc = ecc2;
        last = std::move(last2);
      } else {
        break;
      }
    }

    // Cuthill-McKee from the start vertex, then reverse this component
    cm.clear();
    cm.push_back(start);
    forward[start] = 0;  // temporary in-component "seen" mark, overwritten below
    std::vector<index_t> nbrs;
    for (std::size_t q = 0; q < cm.size(); ++q) {
      index_t u = cm[q];
      nbrs.clear();
      for (index_t e = g.ptr[u]; e < g.ptr[u + 1]; ++e)
        if (forward[g.adj[e]] == -1) nbrs.push_back(g.adj[e]);
      std::sort(nbrs.begin(), nbrs.end(), [&](index_t a, index_t b) {
        return std::pair(g.degree[a], a) < std::pair(g.degree[b], b);
      });
      for (index_t v : nbrs) {
        forward[v] = 0;  // mark
        cm.push_back(v);
      }
    }
    const index_t csize = static_cast<index_t>(cm.size());
    for (index_t q = 0; q < csize; ++q) forward[cm[q]] = next_pos + (csize - 1 - q);
    next_pos += csize;
  }
  return make_permutation(std::move(forward));
}

Permutation order_lexical(const PointSet& points_embedded, index_t bins_per_axis) {
  const index_t dim = points_embedded.dim, n = points_embedded.n_points;
  if (dim < 1 || dim > 3)
    throw error(errc::dim_too_high, "lexical ordering supports dim 1..3, got " + std::to_string(dim));
  if (bins_per_axis < 1) throw error(errc::invalid_argument, "bins_per_axis must be >= 1");

  std::vector<index_t> idx(n);
  for (index_t i = 0; i < n; ++i) idx[i] = i;

  if (dim == 1) {
    std::sort(idx.begin(), idx.end(), [&](index_t a, index_t b) {
      return std::pair(points_embedded.point(a)[0], a) < std::pair(points_embedded.point(b)[0], b);
    });
  } else {
    std::array<double, 3> lo{}, hi{};
    for (index_t a = 0; a < dim; ++a) lo[a] = hi[a] = n > 0 ? points_embedded.point(0)[a] : 0.0;
    for (index_t i = 1; i < n; ++i)
      for (index_t a = 0; a < dim; ++a) {
        lo[a] = std::min(lo[a], points_embedded.point(i)[a]);
        hi[a] = std::max(hi[a], points_embedded.point(i)[a]);
      }
    auto bin_of = [&](index_t i, index_t a) -> index_t {
      const double width = (hi[a] - lo[a]) / static_cast<double>(bins_per_axis);
      if (width <= 0.0) return 0;
      const double x = points_embedded.point(i)[a];
      return std::min<index_t>(bins_per_axis - 1,
                               static_cast<index_t>((x - lo[a]) / width));
    };
    std::sort(idx.begin(), idx.end(), [&](index_t a, index_t b) {
      for (index_t ax = 0; ax < dim; ++ax) {
        index_t ba = bin_of(a, ax), bb = bin_of(b, ax);
        if (ba != bb) return ba < bb;
      }
      const double ra = points_embedded.point(a)[dim - 1], rb = points_embedded.point(b)[dim - 1];
      if (ra != rb) return ra < rb;
      return a < b;
    });
  }

  std::vector<index_t> forward(n);
  for (index_t pos = 0; pos < n; ++pos) forward[idx[pos]] = pos;
  return make_permutation(std::move(forward));
}

OrderingResult order_tree(const PointSet& points_embedded, index_t leaf_capacity,
                          index_t max_depth) {
  auto tree = std::make_shared<PartitionTree>(
      build_tree(points_embedded, leaf_capacity, max_depth));
  OrderingResult r;
  r.scheme = "tree" + std::to_string(points_embedded.dim);
  r.row_perm = tree->leaf_order;
  r.col_perm = tree->leaf_order;
  r.row_tree = tree;
  r.col_tree = tree;
  return r;
}

void write_permutation(const Permutation& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  out << p.size() << "\n";
  for (index_t v : p.forward) out << v << "\n";
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

Permutation read_permutation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open " + path);
  long long n = 0;
  if (!(in >> n) || n < 0) throw error(errc::malformed_record, "bad permutation header in " + path);
  std::vector<index_t> forward(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i)
    if (!(in >> forward[i]))
      throw error(errc::malformed_record, "truncated permutation in " + path);
  return make_permutation(std::move(forward));
}

}  // namespace patchord
