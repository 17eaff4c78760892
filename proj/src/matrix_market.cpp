#include "patchord/matrix_market.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace patchord {

namespace {

void write_header(std::ofstream& out, const std::string& field, index_t n_rows, index_t n_cols,
                  index_t nnz) {
  out << "%%MatrixMarket matrix coordinate " << field << " general\n";
  out << n_rows << " " << n_cols << " " << nnz << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  std::ofstream out = open_out(path);
  write_header(out, "real", m.pattern.n_rows, m.pattern.n_cols, m.nnz());
  char buf[64];
  for (std::size_t e = 0; e < m.values.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", m.values[e]);
    out << (m.pattern.entries[e].first + 1) << " " << (m.pattern.entries[e].second + 1) << " "
        << buf << "\n";
  }
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

void write_matrix_market(const SparsePattern& p, const std::string& path) {
  std::ofstream out = open_out(path);
  write_header(out, "pattern", p.n_rows, p.n_cols, p.nnz());
  for (const auto& [i, j] : p.entries) out << (i + 1) << " " << (j + 1) << "\n";
  if (!out) throw error(errc::io_error, "write failed for " + path);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw error(errc::empty_file, path);
  std::istringstream hdr(line);
  std::string banner, object, fmt, field, symmetry;
  hdr >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || fmt != "coordinate")
    throw error(errc::malformed_record, "unsupported Matrix Market header in " + path);
  if (field != "real" && field != "pattern" && field != "integer")
    throw error(errc::malformed_record, "unsupported field type '" + field + "' in " + path);
  if (symmetry != "general")
    throw error(errc::malformed_record, "unsupported symmetry '" + symmetry + "' in " + path);
  const bool has_values = field != "pattern";

  // skip comments and blank lines up to the size line
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    break;
  }
  if (!in) throw error(errc::malformed_record, "missing size line in " + path);
  long long n_rows = 0, n_cols = 0, nnz = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> n_rows >> n_cols >> nnz))
      throw error(errc::malformed_record, "bad size line in " + path);
  }

  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  long long seen = 0;
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    std::istringstream row(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(row >> i >> j) || (has_values && !(row >> v)))
      throw error(errc::malformed_record, "bad entry line in " + path + ": " + line);
    entries.emplace_back(static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v);
    ++seen;
  }
  if (seen != nnz)
    throw error(errc::malformed_record, "entry count " + std::to_string(seen) +
                                            " does not match header nnz " + std::to_string(nnz) +
                                            " in " + path);
  return csr_from_coo(entries, static_cast<index_t>(n_rows), static_cast<index_t>(n_cols));
}

SparsePattern read_matrix_market_pattern(const std::string& path) {
  return read_matrix_market(path).pattern;
}

}  // namespace patchord
