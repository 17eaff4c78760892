#include "patchord/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "patchord/kernels.hpp"
#include "patchord/knn.hpp"
#include "patchord/locality.hpp"
#include "patchord/pca.hpp"
#include "patchord/spy.hpp"

namespace patchord {

namespace {

using clock_type = std::chrono::steady_clock;

std::int64_t elapsed_ns(clock_type::time_point since) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock_type::now() - since);
  return std::max<std::int64_t>(1, ns.count());
}

template <typename Fn>
auto phase(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const error& e) {
    throw error(e.code(), std::string(name) + " phase: " + e.message());
  }
}

PointSet embed_points(const PointSet& points, index_t d, double* captured_ratio) {
  if (points.dim <= d) return points;
  const Embedding e = fit_pca(points, d);
  if (captured_ratio) *captured_ratio = variance_ratio(e);
  return project(points, e);
}

std::string format_g17(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

double median_ns(std::vector<std::int64_t> times) {
  std::sort(times.begin(), times.end());
  return static_cast<double>(times[times.size() / 2]);
}

ChargeVector make_charge(index_t n, std::uint64_t seed, const std::string& tag) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ChargeVector x;
  x.values.resize(n);
  x.ordering = tag;
  for (double& v : x.values) v = 2.0 * rng.uniform01() - 1.0;
  return x;
}

double unpermuted_checksum(const std::vector<double>& y, const Permutation& rows) {
  double sum = 0.0;
  for (index_t i = 0; i < static_cast<index_t>(y.size()); ++i) sum += y[rows.forward[i]];
  return sum;
}

}  // namespace

std::string machine_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        model = line.substr(colon + 1);
        model.erase(0, model.find_first_not_of(" \t"));
      }
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

OrderingResult make_ordering(const std::string& scheme, const SparsePattern& p,
                             const PointSet& points, index_t bins_per_axis,
                             index_t leaf_capacity, index_t max_depth, std::uint64_t seed,
                             double* captured_ratio) {
  if (captured_ratio) *captured_ratio = 1.0;
  const index_t n = p.n_rows;
  OrderingResult r;
  r.scheme = scheme;
  if (scheme == "natural") {
    r.row_perm = r.col_perm = identity_permutation(n);
    return r;
  }
  if (scheme == "scattered") {
    r.row_perm = r.col_perm = order_scattered(n, seed);
    return r;
  }
  if (scheme == "rcm") {
    r.row_perm = r.col_perm = order_rcm(p);
    return r;
  }
  const bool lex = scheme.rfind("lex", 0) == 0;
  const bool tree = scheme.rfind("tree", 0) == 0;
  if ((!lex && !tree) || scheme.size() != (lex ? 4u : 5u) || scheme.back() < '1' ||
      scheme.back() > '3' || (tree && scheme.back() == '1'))
    throw error(errc::invalid_argument, "unknown ordering scheme '" + scheme + "'");
  if (points.n_points != n)
    throw error(errc::size_mismatch, "scheme '" + scheme + "' needs one point per row, got " +
                                         std::to_string(points.n_points) + " points for " +
                                         std::to_string(n) + " rows");
  const index_t d = scheme.back() - '0';
  const PointSet emb = embed_points(points, d, captured_ratio);
  if (lex) {
    r.row_perm = r.col_perm = order_lexical(emb, bins_per_axis);
    return r;
  }
  r = order_tree(emb, leaf_capacity, max_depth);
  r.scheme = scheme;
  return r;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.points.n_points < 1)
    throw error(errc::invalid_argument, "pipeline needs a non-empty point set");
  PipelineResult result;
  result.sigma = config.sigma > 0.0 ? config.sigma : static_cast<double>(config.k) / 2.0;

  // interaction matrix over the kNN pattern
  SparseMatrix m = phase("knn", [&] {
    const KnnGraph g = build_knn(config.points, config.points, config.k);
    double h = config.bandwidth_h;
    if (h <= 0.0) {
      double mean_sq = 0.0;
      for (double d2 : g.neighbor_dists) mean_sq += d2;
      mean_sq /= static_cast<double>(g.neighbor_dists.size());
      h = std::sqrt(std::max(mean_sq, 1e-300));
    }
    SparsePattern pat = pattern_from_knn(g);
    if (config.symmetrize_pattern) pat = symmetrize(pat);
    return gaussian_values(pat, config.points, config.points, h);
  });

  auto order_started = clock_type::now();
  result.ordering = phase("order", [&] {
    return make_ordering(config.scheme, m.pattern, config.points, config.bins_per_axis,
                         config.leaf_capacity, config.max_depth, config.seed,
                         &result.pca_ratio);
  });
  result.report.order_ns = elapsed_ns(order_started);

  auto build_started = clock_type::now();
  phase("build", [&] {
    m = permute(m, result.ordering.row_perm, result.ordering.col_perm);
    result.matrix = result.ordering.row_tree
                        ? build_hier(m, result.ordering.row_tree, result.ordering.col_tree,
                                     config.cut_level)
                        : build_hier_flat(m);
    result.matrix.row_tag = result.matrix.col_tag = result.ordering.scheme;
    return 0;
  });
  result.report.build_ns = elapsed_ns(build_started);

  phase("measure", [&] {
    GammaParams gp;
    gp.sigma = result.sigma;
    result.gamma = gamma_grid(m.pattern, gp);
    result.bandwidth = bandwidth(m.pattern);
    return 0;
  });

  if (!config.spy_path.empty())
    phase("spy", [&] {
      spy_image(m.pattern, config.spy_side, config.spy_path);
      return 0;
    });

  phase("multiply", [&] {
    const bool blocked = config.scheme.rfind("tree", 0) == 0;
    const ChargeVector x_orig = make_charge(m.pattern.n_cols, config.seed, "");
    ChargeVector x{std::vector<double>(x_orig.values.size()), result.ordering.scheme};
    for (index_t j = 0; j < m.pattern.n_cols; ++j)
      x.values[result.ordering.col_perm.forward[j]] = x_orig.values[j];

    auto multiply_once = [&] {
      return blocked ? spmv_hier_parallel(result.matrix, x, config.workers) : spmv_flat(m, x);
    };
    std::vector<std::int64_t> times;
    PotentialVector y;
    if (config.reps >= 3) {
      multiply_once();  // warm-up
      for (index_t r = 0; r < config.reps; ++r) {
        const auto t0 = clock_type::now();
        y = multiply_once();
        times.push_back(elapsed_ns(t0));
      }
    } else {
      const auto t0 = clock_type::now();
      y = multiply_once();
      times.push_back(elapsed_ns(t0));
    }
    result.report.multiply_ns = static_cast<std::int64_t>(median_ns(times));
    result.report.reps = static_cast<index_t>(times.size());
    result.report.checksum = unpermuted_checksum(y.values, result.ordering.row_perm);
    return 0;
  });

  result.report.machine = machine_descriptor();
  result.report.scheme = result.ordering.scheme;
  result.report.n = m.pattern.n_rows;
  result.report.nnz = static_cast<std::int64_t>(m.nnz());
  result.report.k = config.k;
  result.report.workers = config.workers;
  result.report.throughput =
      static_cast<double>(result.report.nnz) * 1e9 / static_cast<double>(result.report.multiply_ns);

  phase("report", [&] {
    if (!config.json_path.empty()) {
      nlohmann::json j{{"machine", result.report.machine},
                       {"scheme", result.report.scheme},
                       {"n", result.report.n},
                       {"nnz", result.report.nnz},
                       {"k", config.k},
                       {"seed", config.seed},
                       {"sigma", result.sigma},
                       {"gamma", result.gamma},
                       {"bandwidth", result.bandwidth},
                       {"pca_ratio", result.pca_ratio},
                       {"cut_level", result.matrix.cut_level},
                       {"order_ns", result.report.order_ns},
                       {"build_ns", result.report.build_ns},
                       {"multiply_ns", result.report.multiply_ns},
                       {"reps", result.report.reps},
                       {"workers", result.report.workers},
                       {"throughput", result.report.throughput},
                       {"checksum", result.report.checksum}};
      std::ofstream out(config.json_path);
      if (!out) throw error(errc::io_error, "cannot open " + config.json_path + " for writing");
      out << j.dump(2) << '\n';
      if (!out) throw error(errc::io_error, "write failed for " + config.json_path);
    }
    if (!config.csv_path.empty()) append_bench_csv(config.csv_path, {result.report});
    return 0;
  });
  return result;
}

std::vector<BenchReport> bench_spmv(const SparseMatrix& m, const PointSet& points,
                                    const std::vector<std::string>& schemes, index_t reps,
                                    const std::vector<index_t>& workers, std::uint64_t seed,
                                    index_t leaf_capacity, index_t max_depth,
                                    index_t bins_per_axis) {
  if (reps < 3) throw error(errc::invalid_argument, "bench needs reps >= 3");
  if (schemes.empty()) throw error(errc::invalid_argument, "bench needs at least one scheme");
  const std::string machine = machine_descriptor();
  const ChargeVector x_orig = make_charge(m.pattern.n_cols, seed, "");

  std::vector<BenchReport> reports;
  bool have_reference = false;
  double reference = 0.0;
  for (const std::string& scheme : schemes) {
    BenchReport base;
    base.machine = machine;
    base.scheme = scheme;
    base.n = m.pattern.n_rows;
    base.nnz = static_cast<std::int64_t>(m.nnz());
    base.reps = reps;

    auto order_started = clock_type::now();
    const OrderingResult ord =
        make_ordering(scheme, m.pattern, points, bins_per_axis, leaf_capacity, max_depth, seed);
    base.order_ns = elapsed_ns(order_started);

    const bool blocked = scheme.rfind("tree", 0) == 0;
    auto build_started = clock_type::now();
    const SparseMatrix mp = permute(m, ord.row_perm, ord.col_perm);
    HierBlockMatrix h;
    if (blocked) {
      h = build_hier(mp, ord.row_tree, ord.col_tree);
      h.row_tag = h.col_tag = scheme;
    }
    base.build_ns = elapsed_ns(build_started);

    ChargeVector x{std::vector<double>(x_orig.values.size()), scheme};
    for (index_t j = 0; j < m.pattern.n_cols; ++j)
      x.values[ord.col_perm.forward[j]] = x_orig.values[j];

    for (index_t w : workers) {
      if (!blocked && w != 1) continue;  // the flat kernel is sequential
      auto multiply_once = [&] { return blocked ? spmv_hier_parallel(h, x, w) : spmv_flat(mp, x); };
      multiply_once();  // warm-up
      std::vector<std::int64_t> times;
      PotentialVector y;
      for (index_t r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        y = multiply_once();
        times.push_back(elapsed_ns(t0));
      }
      BenchReport rep = base;
      rep.k = 0;
      rep.workers = w;
      rep.multiply_ns = static_cast<std::int64_t>(median_ns(times));
      rep.throughput =
          static_cast<double>(rep.nnz) * 1e9 / static_cast<double>(rep.multiply_ns);
      rep.checksum = unpermuted_checksum(y.values, ord.row_perm);
      if (!have_reference) {
        reference = rep.checksum;
        have_reference = true;
      } else if (std::abs(rep.checksum - reference) >
                 1e-9 * std::max(1.0, std::abs(reference))) {
        throw error(errc::checksum_mismatch,
                    "scheme '" + scheme + "' checksum " + format_g17(rep.checksum) +
                        " disagrees with reference " + format_g17(reference));
      }
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

void append_bench_csv(const std::string& path, const std::vector<BenchReport>& reports) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  if (fresh)
    out << "machine,scheme,n,nnz,k,order_ns,build_ns,multiply_ns,reps,workers,throughput,"
           "checksum\n";
  for (const BenchReport& r : reports)
    out << '"' << r.machine << "\"," << r.scheme << ',' << r.n << ',' << r.nnz << ',' << r.k
        << ',' << r.order_ns << ',' << r.build_ns << ',' << r.multiply_ns << ',' << r.reps << ','
        << r.workers << ',' << format_g17(r.throughput) << ',' << format_g17(r.checksum) << '\n';
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

void append_measure_csv(const std::string& path, const std::string& pattern_file,
                        const std::string& scheme, index_t nnz, double sigma, double gamma,
                        index_t bandwidth) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  if (fresh) out << "pattern,scheme,nnz,sigma,gamma,bandwidth\n";
  out << pattern_file << ',' << scheme << ',' << nnz << ',' << format_g17(sigma) << ','
      << format_g17(gamma) << ',' << bandwidth << '\n';
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

}  // namespace patchord
