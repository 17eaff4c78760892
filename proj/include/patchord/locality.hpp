#pragma once

#include <utility>
#include <vector>

#include "patchord/core.hpp"

namespace patchord {

struct GammaParams {
  double sigma = 10.0;
  double cutoff_rho = 3.0;          // truncation radius for gamma_grid, in units of sigma
  bool include_self_pairs = true;   // the p = q terms, 1/sigma in total
};

// gamma(A; sigma) = (1 / (sigma * nnz)) * sum over index pairs p,q of
// exp(-|p - q|^2 / sigma^2).  Exact all-pairs evaluation, O(nnz^2).
double gamma_exact(const SparsePattern& p, const GammaParams& params);

// Same sum restricted to pairs whose sigma-sized grid cells lie within
// Chebyshev distance ceil(cutoff_rho); every neglected pair contributes
// less than exp(-cutoff_rho^2) to the inner sum.
double gamma_grid(const SparsePattern& p, const GammaParams& params);

// Half-open index rectangles, pairwise non-overlapping.
struct PatchRect {
  index_t row_lo, row_hi, col_lo, col_hi;

  index_t area() const { return (row_hi - row_lo) * (col_hi - col_lo); }
  bool overlaps(const PatchRect& o) const {
    return row_lo < o.row_hi && o.row_lo < row_hi && col_lo < o.col_hi && o.col_lo < col_hi;
  }
};

struct PatchCovering {
  std::vector<PatchRect> patches;
};

// beta(A) = max over non-overlapping rectangle coverings of the nonzeros of
// (1 / patch count) * (nnz / total patch area).  Exhaustive branch-and-bound;
// patterns are capped at 64 cells.  Returns the score and a witness covering.
std::pair<double, PatchCovering> beta_bruteforce(const SparsePattern& p);

// Exhausts all row/column permutation pairs (n_rows, n_cols <= 5), scoring
// each with beta_bruteforce; returns a maximizer and its beta.
std::tuple<Permutation, Permutation, double> best_ordering_bruteforce(const SparsePattern& p);

// max |i - j| over entries; 0 for an empty pattern.
index_t bandwidth(const SparsePattern& p);

}  // namespace patchord
