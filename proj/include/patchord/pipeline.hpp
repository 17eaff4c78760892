#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchord/core.hpp"
#include "patchord/hier.hpp"
#include "patchord/orderings.hpp"

namespace patchord {

struct BenchReport {
  std::string machine;
  std::string scheme;
  index_t n = 0;
  std::int64_t nnz = 0;
  index_t k = 0;
  std::int64_t order_ns = 0;
  std::int64_t build_ns = 0;     // permute + blocked-storage construction
  std::int64_t multiply_ns = 0;  // median over the timed repetitions
  index_t reps = 0;
  index_t workers = 1;
  double throughput = 0.0;       // nonzeros per second
  double checksum = 0.0;         // output summed in original index order
};

struct PipelineConfig {
  PointSet points;
  std::string scheme = "tree3";
  index_t k = 10;
  bool symmetrize_pattern = true;
  double sigma = 0.0;        // 0: default k/2
  double bandwidth_h = 0.0;  // kernel width; 0: rms neighbor distance
  index_t bins_per_axis = 32;
  index_t leaf_capacity = 128;
  index_t max_depth = 12;
  index_t cut_level = kAutoCutLevel;
  std::uint64_t seed = 1;
  index_t workers = 1;
  index_t reps = 0;          // >= 3 enables the timed multiply benchmark
  std::string spy_path;      // empty: no image
  index_t spy_side = 512;
  std::string json_path;     // empty: no metadata file
  std::string csv_path;      // empty: no CSV row
};

struct PipelineResult {
  OrderingResult ordering;
  HierBlockMatrix matrix;
  BenchReport report;
  double gamma = 0.0;
  index_t bandwidth = 0;   // of the reordered pattern
  double pca_ratio = 1.0;  // captured variance share (1 when no projection ran)
  double sigma = 0.0;      // the value actually used
};

std::string machine_descriptor();

// Ordering for a named scheme over a (pattern, embedded points) pair.
// Schemes: natural, scattered, rcm, lex1..3, tree2..3; the lexical and tree
// schemes project the points down with PCA when needed.  captured_ratio, when
// non-null, receives the projection's variance share.
OrderingResult make_ordering(const std::string& scheme, const SparsePattern& p,
                             const PointSet& points, index_t bins_per_axis,
                             index_t leaf_capacity, index_t max_depth, std::uint64_t seed,
                             double* captured_ratio = nullptr);

// knn -> values -> (symmetrize) -> embed -> order -> permute -> build ->
// measure -> optional spy / bench / reports.  Errors carry the phase name.
PipelineResult run_pipeline(const PipelineConfig& config);

// Orders and multiplies the same matrix under several schemes; tree schemes
// run the blocked kernel at each requested worker count, the rest run the
// flat kernel once.  All un-permuted checksums must agree to 1e-9 relative.
std::vector<BenchReport> bench_spmv(const SparseMatrix& m, const PointSet& points,
                                    const std::vector<std::string>& schemes, index_t reps,
                                    const std::vector<index_t>& workers, std::uint64_t seed,
                                    index_t leaf_capacity = 128, index_t max_depth = 12,
                                    index_t bins_per_axis = 32);

void append_bench_csv(const std::string& path, const std::vector<BenchReport>& reports);

// measurement table row: pattern file, scheme, nnz, sigma, gamma, bandwidth
void append_measure_csv(const std::string& path, const std::string& pattern_file,
                        const std::string& scheme, index_t nnz, double sigma, double gamma,
                        index_t bandwidth);

}  // namespace patchord
