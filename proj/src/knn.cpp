#include "patchord/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace patchord {

KnnGraph build_knn(const PointSet& targets, const PointSet& sources, index_t k) {
  const bool self_set = &targets == &sources;
  const index_t M = targets.n_points, N = sources.n_points, D = targets.dim;
  if (targets.dim != sources.dim)
    throw error(errc::dim_mismatch, "target dim " + std::to_string(targets.dim) +
                                        " != source dim " + std::to_string(sources.dim));
  if (k < 1) throw error(errc::invalid_argument, "k must be >= 1");
  if (k > (self_set ? N - 1 : N))
    throw error(errc::k_too_large, "k = " + std::to_string(k) + " with " + std::to_string(N) +
                                       (self_set ? " sources (self set)" : " sources"));

  KnnGraph g;
  g.k = k;
  g.n_targets = M;
  g.n_sources = N;
  g.neighbor_ids.resize(static_cast<std::size_t>(M) * k);
  g.neighbor_dists.resize(static_cast<std::size_t>(M) * k);

  // Distances for a block of targets against all sources, then per-target
  // selection.  Blocking keeps the source pass cache-friendly at large N.
  constexpr index_t TB = 64;
  std::vector<double> dist(static_cast<std::size_t>(TB) * N);
  std::vector<std::pair<double, index_t>> cand(N);

  for (index_t t0 = 0; t0 < M; t0 += TB) {
    const index_t tb = std::min(TB, M - t0);
    for (index_t ti = 0; ti < tb; ++ti) {
      const double* t = targets.point(t0 + ti);
      double* drow = dist.data() + static_cast<std::size_t>(ti) * N;
      for (index_t s = 0; s < N; ++s) {
        const double* sp = sources.point(s);
        double acc = 0.0;
        for (index_t d = 0; d < D; ++d) {
          const double diff = t[d] - sp[d];
          acc += diff * diff;
        }
        drow[s] = acc;
      }
    }
    for (index_t ti = 0; ti < tb; ++ti) {
      const index_t t = t0 + ti;
      const double* drow = dist.data() + static_cast<std::size_t>(ti) * N;
      for (index_t s = 0; s < N; ++s) cand[s] = {drow[s], s};
      if (self_set) cand[t].first = std::numeric_limits<double>::infinity();
      std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
      std::sort(cand.begin(), cand.begin() + k);
      for (index_t a = 0; a < k; ++a) {
        g.neighbor_dists[static_cast<std::size_t>(t) * k + a] = cand[a].first;
        g.neighbor_ids[static_cast<std::size_t>(t) * k + a] = cand[a].second;
      }
    }
  }
  return g;
}

SparsePattern pattern_from_knn(const KnnGraph& g) {
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(static_cast<std::size_t>(g.n_targets) * g.k);
  for (index_t i = 0; i < g.n_targets; ++i)
    for (index_t a = 0; a < g.k; ++a) entries.emplace_back(i, g.ids(i)[a]);
  return make_pattern(g.n_targets, g.n_sources, std::move(entries));
}

SparsePattern symmetrize(const SparsePattern& p) {
  if (p.n_rows != p.n_cols)
    throw error(errc::not_square, "symmetrize needs a square pattern");
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(p.entries.size() * 2);
  for (const auto& [i, j] : p.entries) {
    entries.emplace_back(i, j);
    entries.emplace_back(j, i);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  return make_pattern(p.n_rows, p.n_cols, std::move(entries));
}

SparseMatrix gaussian_values(const SparsePattern& p, const PointSet& targets,
                             const PointSet& sources, double h) {
  if (!(h > 0.0)) throw error(errc::non_positive_bandwidth, "bandwidth must be positive");
  if (p.n_rows != targets.n_points || p.n_cols != sources.n_points)
    throw error(errc::dim_mismatch, "pattern shape does not match point counts");
  if (targets.dim != sources.dim)
    throw error(errc::dim_mismatch, "target and source dims differ");
  const index_t D = targets.dim;
  const double inv = 1.0 / (2.0 * h * h);
  std::vector<double> values;
  values.reserve(p.entries.size());
  for (const auto& [i, j] : p.entries) {
    const double* t = targets.point(i);
    const double* s = sources.point(j);
    double acc = 0.0;
    for (index_t d = 0; d < D; ++d) {
      const double diff = t[d] - s[d];
      acc += diff * diff;
    }
    values.push_back(std::exp(-acc * inv));
  }
  return make_matrix(p, std::move(values));
}

}  // namespace patchord
