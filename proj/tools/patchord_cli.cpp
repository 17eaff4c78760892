// patchord: reorder sparse near-neighbor matrices for locality, store them in
// multi-level blocked form, and measure/benchmark the difference.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patchord/fvecs.hpp"
#include "patchord/kernels.hpp"
#include "patchord/knn.hpp"
#include "patchord/locality.hpp"
#include "patchord/matrix_market.hpp"
#include "patchord/orderings.hpp"
#include "patchord/pca.hpp"
#include "patchord/pipeline.hpp"
#include "patchord/spy.hpp"
#include "patchord/synth.hpp"

namespace {

using namespace patchord;

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string scheme = "tree3";
  index_t k = 10;
  double sigma = 0.0;  // 0: k/2
  index_t leaf_capacity = 128;
  index_t max_depth = 12;
  index_t bins = 32;
  index_t workers = 1;
  index_t reps = 5;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "deterministic seed");
  cmd->add_option("--scheme", o.scheme,
                  "ordering scheme: natural|scattered|rcm|lex1|lex2|lex3|tree2|tree3");
  cmd->add_option("--k", o.k, "neighbors per target");
  cmd->add_option("--sigma", o.sigma, "locality scale (default k/2)");
  cmd->add_option("--leaf-capacity", o.leaf_capacity, "partition tree leaf capacity");
  cmd->add_option("--max-depth", o.max_depth, "partition tree depth limit");
  cmd->add_option("--bins", o.bins, "bins per axis for the lexical schemes");
  cmd->add_option("--workers", o.workers, "worker threads for the blocked kernel");
  cmd->add_option("--reps", o.reps, "timed repetitions per benchmark point");
  cmd->add_option("--out", o.out, "output path");
}

double sigma_or_default(const CommonOpts& o) {
  return o.sigma > 0.0 ? o.sigma : static_cast<double>(o.k) / 2.0;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"sparse near-neighbor matrix reordering, blocked storage, and benchmarks"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a synthetic pattern or point set");
  CommonOpts gen_o;
  std::string gen_kind = "arrowhead";
  index_t gen_n = 500, gen_b = 20, gen_w = 30, gen_per_row = 30;
  index_t gen_dim = 64, gen_clusters = 32;
  double gen_spread = 10.0, gen_csig = 0.5;
  gen->add_option("--kind", gen_kind, "arrowhead|banded|scattered|mixture")->required();
  gen->add_option("--n", gen_n, "rows (or points for mixture)");
  gen->add_option("--block", gen_b, "arrowhead block size");
  gen->add_option("--width", gen_w, "banded width");
  gen->add_option("--per-row", gen_per_row, "scattered entries per row");
  gen->add_option("--dim", gen_dim, "mixture ambient dimension");
  gen->add_option("--clusters", gen_clusters, "mixture cluster count");
  gen->add_option("--spread", gen_spread, "mixture center spread");
  gen->add_option("--cluster-sigma", gen_csig, "mixture within-cluster spread");
  add_common(gen, gen_o);
  gen->callback([&] {
    if (gen_o.out.empty()) throw error(errc::invalid_argument, "gen needs --out");
    if (gen_kind == "arrowhead")
      write_matrix_market(gen_arrowhead(gen_n, gen_b), gen_o.out);
    else if (gen_kind == "banded")
      write_matrix_market(gen_banded(gen_n, gen_w), gen_o.out);
    else if (gen_kind == "scattered")
      write_matrix_market(gen_scattered(gen_n, gen_per_row, gen_o.seed), gen_o.out);
    else if (gen_kind == "mixture")
      write_fvecs(gen_o.out, gen_gaussian_mixture(gen_n, gen_dim, gen_clusters, gen_spread,
                                                  gen_csig, gen_o.seed));
    else
      throw error(errc::invalid_argument, "unknown gen kind '" + gen_kind + "'");
    std::cout << "wrote " << gen_o.out << "\n";
  });

  // ---- knn ----
  auto* knn = app.add_subcommand("knn", "build the kNN pattern (or Gaussian-valued matrix)");
  CommonOpts knn_o;
  std::string knn_points;
  bool knn_sym = false, knn_values = false;
  double knn_h = 0.0;
  knn->add_option("--points", knn_points, ".fvecs input")->required();
  knn->add_flag("--symmetrize", knn_sym, "union with the transpose");
  knn->add_flag("--values", knn_values, "emit Gaussian kernel values instead of structure");
  knn->add_option("--bandwidth", knn_h, "kernel width (default: rms neighbor distance)");
  add_common(knn, knn_o);
  knn->callback([&] {
    if (knn_o.out.empty()) throw error(errc::invalid_argument, "knn needs --out");
    const PointSet pts = read_fvecs(knn_points);
    const KnnGraph g = build_knn(pts, pts, knn_o.k);
    SparsePattern pat = pattern_from_knn(g);
    if (knn_sym) pat = symmetrize(pat);
    if (knn_values) {
      double h = knn_h;
      if (h <= 0.0) {
        double mean_sq = 0.0;
        for (double d2 : g.neighbor_dists) mean_sq += d2;
        h = std::sqrt(mean_sq / static_cast<double>(g.neighbor_dists.size()));
      }
      write_matrix_market(gaussian_values(pat, pts, pts, h), knn_o.out);
    } else {
      write_matrix_market(pat, knn_o.out);
    }
    std::cout << "wrote " << knn_o.out << " (nnz " << pat.nnz() << ")\n";
  });

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "PCA-project a point set");
  CommonOpts embed_o;
  std::string embed_points;
  index_t embed_dim = 3;
  double embed_ratio_tol = -1.0;
  embed->add_option("--points", embed_points, ".fvecs input")->required();
  embed->add_option("--dim", embed_dim, "target dimension (or d_max with --ratio-tol)");
  embed->add_option("--ratio-tol", embed_ratio_tol,
                    "pick the smallest dimension reaching this variance share");
  add_common(embed, embed_o);
  embed->callback([&] {
    if (embed_o.out.empty()) throw error(errc::invalid_argument, "embed needs --out");
    const PointSet pts = read_fvecs(embed_points);
    index_t d = embed_dim;
    if (embed_ratio_tol >= 0.0) d = choose_dim(pts, embed_ratio_tol, embed_dim);
    const Embedding e = fit_pca(pts, d);
    write_fvecs(embed_o.out, project(pts, e));
    std::cout << "wrote " << embed_o.out << " (dim " << d << ", variance share "
              << variance_ratio(e) << ", converged " << (e.converged ? "yes" : "no") << ")\n";
  });

  // ---- order ----
  auto* order = app.add_subcommand("order", "compute a row/column ordering");
  CommonOpts order_o;
  std::string order_pattern, order_points;
  order->add_option("--pattern", order_pattern, "Matrix Market input")->required();
  order->add_option("--points", order_points, ".fvecs input (lex/tree schemes)");
  add_common(order, order_o);
  order->callback([&] {
    if (order_o.out.empty()) throw error(errc::invalid_argument, "order needs --out");
    const SparsePattern pat = read_matrix_market_pattern(order_pattern);
    PointSet pts;
    if (!order_points.empty()) pts = read_fvecs(order_points);
    const OrderingResult r = make_ordering(order_o.scheme, pat, pts, order_o.bins,
                                           order_o.leaf_capacity, order_o.max_depth, order_o.seed);
    write_permutation(r.row_perm, order_o.out);
    const SparsePattern moved = permute(pat, r.row_perm, r.col_perm);
    std::cout << "wrote " << order_o.out << " (scheme " << r.scheme << ", bandwidth "
              << bandwidth(moved) << ")\n";
  });

  // ---- measure ----
  auto* measure = app.add_subcommand("measure", "gamma/bandwidth of a pattern under a scheme");
  CommonOpts measure_o;
  std::string measure_pattern, measure_points, measure_csv;
  bool measure_exact = false;
  measure->add_option("--pattern", measure_pattern, "Matrix Market input")->required();
  measure->add_option("--points", measure_points, ".fvecs input (lex/tree schemes)");
  measure->add_option("--csv", measure_csv, "append a CSV row here");
  measure->add_flag("--exact", measure_exact, "use the quadratic estimator, not the grid");
  add_common(measure, measure_o);
  measure->callback([&] {
    const SparsePattern pat = read_matrix_market_pattern(measure_pattern);
    PointSet pts;
    if (!measure_points.empty()) pts = read_fvecs(measure_points);
    const OrderingResult r =
        make_ordering(measure_o.scheme, pat, pts, measure_o.bins, measure_o.leaf_capacity,
                      measure_o.max_depth, measure_o.seed);
    const SparsePattern moved = permute(pat, r.row_perm, r.col_perm);
    GammaParams gp;
    gp.sigma = sigma_or_default(measure_o);
    const double g = measure_exact ? gamma_exact(moved, gp) : gamma_grid(moved, gp);
    const index_t bw = bandwidth(moved);
    std::cout << measure_pattern << " scheme=" << r.scheme << " nnz=" << moved.nnz()
              << " sigma=" << gp.sigma << " gamma=" << g << " bandwidth=" << bw << "\n";
    if (!measure_csv.empty()) append_measure_csv(measure_csv, measure_pattern, r.scheme,
                                                 moved.nnz(), gp.sigma, g, bw);
  });

  // ---- spy ----
  auto* spy = app.add_subcommand("spy", "render a pattern to a PGM occupancy image");
  CommonOpts spy_o;
  std::string spy_pattern;
  index_t spy_side = 512;
  std::vector<index_t> spy_roi;
  spy->add_option("--pattern", spy_pattern, "Matrix Market input")->required();
  spy->add_option("--side", spy_side, "image side in pixels");
  spy->add_option("--roi", spy_roi, "row_lo row_hi col_lo col_hi sub-window")->expected(4);
  add_common(spy, spy_o);
  spy->callback([&] {
    if (spy_o.out.empty()) throw error(errc::invalid_argument, "spy needs --out");
    const SparsePattern pat = read_matrix_market_pattern(spy_pattern);
    SpyRoi roi{};
    if (!spy_roi.empty()) roi = {spy_roi[0], spy_roi[1], spy_roi[2], spy_roi[3]};
    spy_image(pat, spy_side, spy_o.out, roi);
    std::cout << "wrote " << spy_o.out << "\n";
  });

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "SpMV throughput across schemes and workers");
  CommonOpts bench_o;
  std::string bench_matrix, bench_points, bench_schemes = "scattered,tree3";
  std::string bench_workers = "1", bench_csv, bench_json;
  bench->add_option("--matrix", bench_matrix, "Matrix Market input (values optional)");
  bench->add_option("--points", bench_points, ".fvecs input (builds the kNN matrix)");
  bench->add_option("--schemes", bench_schemes, "comma-separated scheme list");
  bench->add_option("--worker-list", bench_workers, "comma-separated worker counts");
  bench->add_option("--csv", bench_csv, "append rows here");
  add_common(bench, bench_o);
  bench->callback([&] {
    SparseMatrix m;
    PointSet pts;
    if (!bench_points.empty()) {
      pts = read_fvecs(bench_points);
      const KnnGraph g = build_knn(pts, pts, bench_o.k);
      double mean_sq = 0.0;
      for (double d2 : g.neighbor_dists) mean_sq += d2;
      const double h = std::sqrt(mean_sq / static_cast<double>(g.neighbor_dists.size()));
      m = gaussian_values(symmetrize(pattern_from_knn(g)), pts, pts, h);
    } else if (!bench_matrix.empty()) {
      m = read_matrix_market(bench_matrix);
    } else {
      throw error(errc::invalid_argument, "bench needs --matrix or --points");
    }
    std::vector<index_t> workers;
    for (const std::string& w : split_list(bench_workers))
      workers.push_back(static_cast<index_t>(std::stol(w)));
    const auto reports =
        bench_spmv(m, pts, split_list(bench_schemes), bench_o.reps, workers, bench_o.seed,
                   bench_o.leaf_capacity, bench_o.max_depth, bench_o.bins);
    for (const BenchReport& r : reports)
      std::cout << r.scheme << " workers=" << r.workers << " multiply_ns=" << r.multiply_ns
                << " throughput=" << r.throughput << " checksum=" << r.checksum << "\n";
    if (!bench_csv.empty()) append_bench_csv(bench_csv, reports);
  });

  // ---- tsne-attr ----
  auto* tsne = app.add_subcommand("tsne-attr", "one attractive-force evaluation");
  CommonOpts tsne_o;
  std::string tsne_matrix, tsne_embedding;
  tsne->add_option("--matrix", tsne_matrix, "affinity matrix (Matrix Market)")->required();
  tsne->add_option("--embedding", tsne_embedding, "current coordinates (.fvecs)")->required();
  add_common(tsne, tsne_o);
  tsne->callback([&] {
    if (tsne_o.out.empty()) throw error(errc::invalid_argument, "tsne-attr needs --out");
    const SparseMatrix m = read_matrix_market(tsne_matrix);
    const PointSet y = read_fvecs(tsne_embedding);
    HierBlockMatrix h = build_hier_flat(m);
    const PointSet f = tsne_attractive_step(h, y, y.dim);
    write_fvecs(tsne_o.out, f);
    std::cout << "wrote " << tsne_o.out << "\n";
  });

  // ---- meanshift ----
  auto* ms = app.add_subcommand("meanshift", "iterate kNN mean shift");
  CommonOpts ms_o;
  std::string ms_sources, ms_targets;
  index_t ms_iters = 50, ms_refresh = 10;
  double ms_h = 1.0;
  bool ms_reorder = false;
  ms->add_option("--sources", ms_sources, "fixed source points (.fvecs)")->required();
  ms->add_option("--targets", ms_targets, "initial means (.fvecs, default: the sources)");
  ms->add_option("--iters", ms_iters, "number of shift steps");
  ms->add_option("--bandwidth", ms_h, "kernel width")->required();
  ms->add_option("--refresh", ms_refresh, "neighbor refresh period");
  ms->add_flag("--reorder", ms_reorder, "tree-reorder targets at each refresh");
  add_common(ms, ms_o);
  ms->callback([&] {
    if (ms_o.out.empty()) throw error(errc::invalid_argument, "meanshift needs --out");
    const PointSet sources = read_fvecs(ms_sources);
    const PointSet targets = ms_targets.empty() ? sources : read_fvecs(ms_targets);
    MeanShiftState s =
        meanshift_init(sources, targets, ms_h, ms_o.k, ms_refresh, ms_reorder);
    for (index_t it = 0; it < ms_iters; ++it) s = meanshift_step(std::move(s));
    write_fvecs(ms_o.out, s.targets);
    std::cout << "wrote " << ms_o.out << " after " << s.iteration << " iterations\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const patchord::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
