#include "patchord/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

#include "patchord/orderings.hpp"
#include "patchord/pca.hpp"

namespace patchord {

namespace {

void check_tag(const std::string& vec_tag, const std::string& mat_tag, const char* side) {
  if (!vec_tag.empty() && !mat_tag.empty() && vec_tag != mat_tag)
    throw error(errc::ordering_mismatch, std::string(side) + " vector is laid out under '" +
                                             vec_tag + "' but the matrix expects '" + mat_tag +
                                             "'");
}

// shared leaf-block accumulation used by every spmv variant
void apply_block(const HierBlockMatrix& h, index_t id, const double* x, double* y) {
  const HierBlock& b = h.blocks[id];
  if (b.is_leaf) {
    const double* xc = x + b.col_offset;
    double* yr = y + b.row_offset;
    for (std::size_t e = 0; e < b.vals.size(); ++e) yr[b.lr[e]] += b.vals[e] * xc[b.lc[e]];
    return;
  }
  for (index_t c : b.children) apply_block(h, c, x, y);
}

}  // namespace

PotentialVector spmv_flat(const SparseMatrix& m, const ChargeVector& x) {
  if (static_cast<index_t>(x.values.size()) != m.pattern.n_cols)
    throw error(errc::dim_mismatch, "charge vector length " + std::to_string(x.values.size()) +
                                        " vs " + std::to_string(m.pattern.n_cols) + " columns");
  PotentialVector y;
  y.values.assign(m.pattern.n_rows, 0.0);
  y.ordering = x.ordering;
  for (std::size_t e = 0; e < m.values.size(); ++e) {
    const auto [i, j] = m.pattern.entries[e];
    y.values[i] += m.values[e] * x.values[j];
  }
  return y;
}

PotentialVector spmv_hier(const HierBlockMatrix& h, const ChargeVector& x) {
  if (static_cast<index_t>(x.values.size()) != h.n_cols)
    throw error(errc::dim_mismatch, "charge vector length " + std::to_string(x.values.size()) +
                                        " vs " + std::to_string(h.n_cols) + " columns");
  check_tag(x.ordering, h.col_tag, "charge");
  PotentialVector y;
  y.values.assign(h.n_rows, 0.0);
  y.ordering = h.row_tag;
  for (index_t top : h.top_blocks) apply_block(h, top, x.values.data(), y.values.data());
  return y;
}

PotentialVector spmv_hier_parallel(const HierBlockMatrix& h, const ChargeVector& x,
                                   index_t workers) {
  if (workers < 1) throw error(errc::invalid_argument, "workers must be >= 1");
  if (static_cast<index_t>(x.values.size()) != h.n_cols)
    throw error(errc::dim_mismatch, "charge vector length " + std::to_string(x.values.size()) +
                                        " vs " + std::to_string(h.n_cols) + " columns");
  check_tag(x.ordering, h.col_tag, "charge");
  PotentialVector y;
  y.values.assign(h.n_rows, 0.0);
  y.ordering = h.row_tag;

  // block rows: maximal runs of top blocks sharing a target cluster (the
  // arena sort keyed on row offset makes them contiguous)
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t b = 0; b < h.top_blocks.size();) {
    std::size_t e = b + 1;
    while (e < h.top_blocks.size() &&
           h.blocks[h.top_blocks[e]].row_node == h.blocks[h.top_blocks[b]].row_node)
      ++e;
    rows.emplace_back(b, e);
    b = e;
  }

  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    for (std::size_t r; (r = next.fetch_add(1)) < rows.size();)
      for (std::size_t b = rows[r].first; b < rows[r].second; ++b)
        apply_block(h, h.top_blocks[b], x.values.data(), y.values.data());
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (index_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }
  return y;
}

PointSet tsne_attractive_step(HierBlockMatrix& h, const PointSet& y, index_t dim_out) {
  if (h.n_rows != h.n_cols) throw error(errc::not_square, "affinity matrix is not square");
  if (y.n_points != h.n_rows)
    throw error(errc::dim_mismatch, "embedding has " + std::to_string(y.n_points) +
                                        " points for an order-" + std::to_string(h.n_rows) +
                                        " matrix");
  if (y.dim != dim_out)
    throw error(errc::dim_mismatch, "embedding dimension " + std::to_string(y.dim) + " vs " +
                                        std::to_string(dim_out));

  update_values(h, [&](index_t i, index_t j, double p) {
    double d2 = 0.0;
    const double* yi = y.point(i);
    const double* yj = y.point(j);
    for (index_t c = 0; c < dim_out; ++c) {
      const double d = yi[c] - yj[c];
      d2 += d * d;
    }
    return p / (1.0 + d2);
  });

  const ChargeVector ones{std::vector<double>(h.n_cols, 1.0), h.col_tag};
  const std::vector<double> r = spmv_hier(h, ones).values;

  PointSet f = make_point_set(y.n_points, dim_out,
                              std::vector<double>(y.coords.size(), 0.0));
  ChargeVector axis{std::vector<double>(h.n_cols), h.col_tag};
  for (index_t c = 0; c < dim_out; ++c) {
    for (index_t i = 0; i < y.n_points; ++i) axis.values[i] = y.point(i)[c];
    const std::vector<double> ay = spmv_hier(h, axis).values;
    for (index_t i = 0; i < y.n_points; ++i) f.point(i)[c] = r[i] * y.point(i)[c] - ay[i];
  }
  return f;
}

MeanShiftState meanshift_init(PointSet sources, PointSet targets, double bandwidth, index_t k,
                              index_t refresh_period, bool reorder_on_refresh) {
  if (sources.dim != targets.dim)
    throw error(errc::dim_mismatch, "source dimension " + std::to_string(sources.dim) +
                                        " vs target dimension " + std::to_string(targets.dim));
  if (!(bandwidth > 0.0))
    throw error(errc::non_positive_bandwidth, "bandwidth must be positive");
  if (refresh_period < 1) throw error(errc::invalid_argument, "refresh period must be >= 1");
  MeanShiftState s;
  s.knn = build_knn(targets, sources, k);
  s.sources = std::move(sources);
  s.targets = std::move(targets);
  s.bandwidth = bandwidth;
  s.k = k;
  s.refresh_period = refresh_period;
  s.reorder_on_refresh = reorder_on_refresh;
  return s;
}

namespace {

// tree-locality order of the current means (through a 3-D view when the
// ambient dimension is higher); sources stay in place, so neighbor ids in the
// kNN rows remain valid and only the rows move with their targets
void reorder_targets(MeanShiftState& s) {
  const index_t d_view = std::min<index_t>(3, s.targets.dim);
  PointSet view = s.targets;
  if (s.targets.dim > 3) {
    const Embedding e = fit_pca(s.targets, d_view);
    view = project(s.targets, e);
  }
  const OrderingResult ord = order_tree(view, 128, 12);
  s.targets = permute(s.targets, ord.row_perm);
  KnnGraph moved = s.knn;
  for (index_t t = 0; t < s.knn.n_targets; ++t) {
    const index_t pos = ord.row_perm.forward[t];
    std::copy(s.knn.ids(t), s.knn.ids(t) + s.knn.k, moved.neighbor_ids.begin() +
                                                        static_cast<std::size_t>(pos) * s.knn.k);
    std::copy(s.knn.dists(t), s.knn.dists(t) + s.knn.k,
              moved.neighbor_dists.begin() + static_cast<std::size_t>(pos) * s.knn.k);
  }
  s.knn = std::move(moved);
}

}  // namespace

MeanShiftState meanshift_step(MeanShiftState state) {
  const double inv_2h2 = 1.0 / (2.0 * state.bandwidth * state.bandwidth);
  const index_t dim = state.targets.dim;
  std::vector<double> mean(dim);
  for (index_t i = 0; i < state.targets.n_points; ++i) {
    double* yi = state.targets.point(i);
    const index_t* ids = state.knn.ids(i);
    double total = 0.0;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (index_t q = 0; q < state.knn.k; ++q) {
      const double* sj = state.sources.point(ids[q]);
      double d2 = 0.0;
      for (index_t c = 0; c < dim; ++c) {
        const double d = yi[c] - sj[c];
        d2 += d * d;
      }
      const double w = std::exp(-d2 * inv_2h2);
      total += w;
      for (index_t c = 0; c < dim; ++c) mean[c] += w * sj[c];
    }
    if (total == 0.0)
      throw error(errc::zero_weight,
                  "all kernel weights underflowed for target " + std::to_string(i));
    for (index_t c = 0; c < dim; ++c) yi[c] = mean[c] / total;
  }
  ++state.iteration;
  if (state.iteration % state.refresh_period == 0) {
    state.knn = build_knn(state.targets, state.sources, state.k);
    if (state.reorder_on_refresh) reorder_targets(state);
  }
  return state;
}

std::vector<PotentialVector> iterate_interactions(
    HierBlockMatrix& h,
    const std::function<std::function<double(index_t, index_t, double)>(index_t)>& value_fn,
    const std::vector<ChargeVector>& x_seq) {
  std::vector<PotentialVector> out;
  out.reserve(x_seq.size());
  for (std::size_t kappa = 0; kappa < x_seq.size(); ++kappa) {
    update_values(h, value_fn(static_cast<index_t>(kappa)));
    out.push_back(spmv_hier(h, x_seq[kappa]));
  }
  return out;
}

}  // namespace patchord
