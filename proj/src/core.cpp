#include "patchord/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace patchord {

const char* errc_name(errc c) {
  switch (c) {
    case errc::out_of_bounds: return "OutOfBounds";
    case errc::duplicate_entry: return "DuplicateEntry";
    case errc::size_mismatch: return "SizeMismatch";
    case errc::dim_mismatch: return "DimMismatch";
    case errc::k_too_large: return "KTooLarge";
    case errc::not_square: return "NotSquare";
    case errc::non_positive_bandwidth: return "NonPositiveBandwidth";
    case errc::degenerate_data: return "DegenerateData";
    case errc::dim_too_high: return "DimTooHigh";
    case errc::level_out_of_range: return "LevelOutOfRange";
    case errc::empty_pattern: return "EmptyPattern";
    case errc::too_large: return "TooLarge";
    case errc::not_divisible: return "NotDivisible";
    case errc::too_wide: return "TooWide";
    case errc::too_many: return "TooMany";
    case errc::span_mismatch: return "SpanMismatch";
    case errc::local_index_overflow: return "LocalIndexOverflow";
    case errc::ordering_mismatch: return "OrderingMismatch";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::zero_weight: return "ZeroWeight";
    case errc::malformed_record: return "MalformedRecord";
    case errc::inconsistent_dim: return "InconsistentDim";
    case errc::empty_file: return "EmptyFile";
    case errc::io_error: return "IoError";
    case errc::checksum_mismatch: return "ChecksumMismatch";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

SparsePattern make_pattern(index_t n_rows, index_t n_cols,
                           std::vector<std::pair<index_t, index_t>> entries) {
  if (n_rows < 0 || n_cols < 0)
    throw error(errc::invalid_argument, "negative pattern dimensions");
  for (const auto& [i, j] : entries) {
    if (i < 0 || i >= n_rows || j < 0 || j >= n_cols)
      throw error(errc::out_of_bounds, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                           ") outside " + std::to_string(n_rows) + "x" +
                                           std::to_string(n_cols));
  }
  std::sort(entries.begin(), entries.end());
  auto dup = std::adjacent_find(entries.begin(), entries.end());
  if (dup != entries.end())
    throw error(errc::duplicate_entry, "repeated entry (" + std::to_string(dup->first) + "," +
                                           std::to_string(dup->second) + ")");
  SparsePattern p;
  p.n_rows = n_rows;
  p.n_cols = n_cols;
  p.entries = std::move(entries);
  return p;
}

SparseMatrix make_matrix(SparsePattern pattern, std::vector<double> values) {
  if (values.size() != pattern.entries.size())
    throw error(errc::size_mismatch, "value count " + std::to_string(values.size()) +
                                         " != entry count " + std::to_string(pattern.entries.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw error(errc::non_finite_value, "matrix value not finite");
  SparseMatrix m;
  m.pattern = std::move(pattern);
  m.values = std::move(values);
  return m;
}

SparseMatrix csr_from_coo(const std::vector<std::tuple<index_t, index_t, double>>& entries,
                          index_t n_rows, index_t n_cols) {
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(std::get<0>(entries[a]), std::get<1>(entries[a])) <
           std::pair(std::get<0>(entries[b]), std::get<1>(entries[b]));
  });
  std::vector<std::pair<index_t, index_t>> idx;
  std::vector<double> vals;
  idx.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t i : order) {
    idx.emplace_back(std::get<0>(entries[i]), std::get<1>(entries[i]));
    vals.push_back(std::get<2>(entries[i]));
  }
  return make_matrix(make_pattern(n_rows, n_cols, std::move(idx)), std::move(vals));
}

Permutation make_permutation(std::vector<index_t> forward) {
  const index_t n = static_cast<index_t>(forward.size());
  std::vector<index_t> inverse(n, -1);
  for (index_t old = 0; old < n; ++old) {
    index_t pos = forward[old];
    if (pos < 0 || pos >= n)
      throw error(errc::out_of_bounds, "permutation image " + std::to_string(pos) + " out of range");
    if (inverse[pos] != -1)
      throw error(errc::duplicate_entry, "permutation image " + std::to_string(pos) + " repeated");
    inverse[pos] = old;
  }
  Permutation p;
  p.forward = std::move(forward);
  p.inverse = std::move(inverse);
  return p;
}

Permutation identity_permutation(index_t n) {
  std::vector<index_t> f(n);
  for (index_t i = 0; i < n; ++i) f[i] = i;
  Permutation p;
  p.inverse = f;
  p.forward = std::move(f);
  return p;
}

SparsePattern permute(const SparsePattern& p, const Permutation& p_rows, const Permutation& p_cols) {
  if (p_rows.size() != p.n_rows || p_cols.size() != p.n_cols)
    throw error(errc::size_mismatch, "permutation sizes do not match pattern shape");
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(p.entries.size());
  for (const auto& [i, j] : p.entries)
    entries.emplace_back(p_rows.forward[i], p_cols.forward[j]);
  return make_pattern(p.n_rows, p.n_cols, std::move(entries));
}

SparseMatrix permute(const SparseMatrix& m, const Permutation& p_rows, const Permutation& p_cols) {
  if (p_rows.size() != m.pattern.n_rows || p_cols.size() != m.pattern.n_cols)
    throw error(errc::size_mismatch, "permutation sizes do not match matrix shape");
  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(m.values.size());
  for (std::size_t e = 0; e < m.values.size(); ++e)
    entries.emplace_back(p_rows.forward[m.pattern.entries[e].first],
                         p_cols.forward[m.pattern.entries[e].second], m.values[e]);
  return csr_from_coo(entries, m.pattern.n_rows, m.pattern.n_cols);
}

PointSet permute(const PointSet& pts, const Permutation& p) {
  if (p.size() != pts.n_points)
    throw error(errc::size_mismatch, "permutation size does not match point count");
  PointSet out = pts;
  for (index_t i = 0; i < pts.n_points; ++i)
    std::copy(pts.point(i), pts.point(i) + pts.dim, out.point(p.forward[i]));
  return out;
}

SparsePattern transpose(const SparsePattern& p) {
  std::vector<std::pair<index_t, index_t>> entries;
  entries.reserve(p.entries.size());
  for (const auto& [i, j] : p.entries) entries.emplace_back(j, i);
  return make_pattern(p.n_cols, p.n_rows, std::move(entries));
}

SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(m.values.size());
  for (std::size_t e = 0; e < m.values.size(); ++e)
    entries.emplace_back(m.pattern.entries[e].second, m.pattern.entries[e].first, m.values[e]);
  return csr_from_coo(entries, m.pattern.n_cols, m.pattern.n_rows);
}

std::vector<index_t> row_pointers(const SparsePattern& p) {
  std::vector<index_t> ptr(static_cast<std::size_t>(p.n_rows) + 1, 0);
  for (const auto& [i, j] : p.entries) ++ptr[static_cast<std::size_t>(i) + 1];
  for (index_t r = 0; r < p.n_rows; ++r) ptr[r + 1] += ptr[r];
  return ptr;
}

PointSet make_point_set(index_t n_points, index_t dim, std::vector<double> coords) {
  if (n_points < 0 || dim < 0)
    throw error(errc::invalid_argument, "negative point set dimensions");
  if (coords.size() != static_cast<std::size_t>(n_points) * static_cast<std::size_t>(dim))
    throw error(errc::size_mismatch, "coordinate count does not match n_points x dim");
  for (double c : coords)
    if (!std::isfinite(c)) throw error(errc::non_finite_value, "coordinate not finite");
  PointSet ps;
  ps.n_points = n_points;
  ps.dim = dim;
  ps.coords = std::move(coords);
  return ps;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // (0,1) exclusive on both ends so the log is safe
  double u1 = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace patchord
