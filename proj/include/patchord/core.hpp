#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace patchord {

using index_t = std::int32_t;

enum class errc {
  out_of_bounds,
  duplicate_entry,
  size_mismatch,
  dim_mismatch,
  k_too_large,
  not_square,
  non_positive_bandwidth,
  degenerate_data,
  dim_too_high,
  level_out_of_range,
  empty_pattern,
  too_large,
  not_divisible,
  too_wide,
  too_many,
  span_mismatch,
  local_index_overflow,
  ordering_mismatch,
  non_finite_value,
  zero_weight,
  malformed_record,
  inconsistent_dim,
  empty_file,
  io_error,
  checksum_mismatch,
  invalid_argument,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code),
        message_(msg) {}
  errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }  // without the code prefix

 private:
  errc code_;
  std::string message_;
};

// Structural sparse pattern. Entries are kept in canonical form: sorted
// row-major (row, then column), no duplicates, all indices in bounds.
struct SparsePattern {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<std::pair<index_t, index_t>> entries;

  index_t nnz() const { return static_cast<index_t>(entries.size()); }
};

// Pattern plus one double value per entry, position-aligned.
struct SparseMatrix {
  SparsePattern pattern;
  std::vector<double> values;

  index_t nnz() const { return pattern.nnz(); }
};

// forward[old_index] = new_index; inverse[new_index] = old_index.
struct Permutation {
  std::vector<index_t> forward;
  std::vector<index_t> inverse;

  index_t size() const { return static_cast<index_t>(forward.size()); }
};

// N x D dense coordinates, point-major.
struct PointSet {
  index_t n_points = 0;
  index_t dim = 0;
  std::vector<double> coords;

  const double* point(index_t i) const { return coords.data() + static_cast<std::size_t>(i) * dim; }
  double* point(index_t i) { return coords.data() + static_cast<std::size_t>(i) * dim; }
};

// Canonicalizes (sorts row-major) and validates bounds / duplicates.
SparsePattern make_pattern(index_t n_rows, index_t n_cols,
                           std::vector<std::pair<index_t, index_t>> entries);

// Validates that values align with the pattern and are all finite.
SparseMatrix make_matrix(SparsePattern pattern, std::vector<double> values);

SparseMatrix csr_from_coo(const std::vector<std::tuple<index_t, index_t, double>>& entries,
                          index_t n_rows, index_t n_cols);

Permutation make_permutation(std::vector<index_t> forward);
Permutation identity_permutation(index_t n);

SparsePattern permute(const SparsePattern& p, const Permutation& p_rows, const Permutation& p_cols);
SparseMatrix permute(const SparseMatrix& m, const Permutation& p_rows, const Permutation& p_cols);
PointSet permute(const PointSet& pts, const Permutation& p);

SparsePattern transpose(const SparsePattern& p);
SparseMatrix transpose(const SparseMatrix& m);

// CSR-style row start offsets (length n_rows + 1) over the canonical entry list.
std::vector<index_t> row_pointers(const SparsePattern& p);

PointSet make_point_set(index_t n_points, index_t dim, std::vector<double> coords);

// Deterministic random helper. Draws come from a fixed mt19937_64 stream and
// hand-rolled transforms, so sequences are identical across platforms and
// standard libraries (std::shuffle / std::*_distribution make no such promise).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in {0, .., n-1}
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }

  // standard normal via Box-Muller
  double normal();

  // in-place Fisher-Yates shuffle
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(i)]);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace patchord
