#include "patchord/locality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>

namespace patchord {

namespace {

void check_gamma_inputs(const SparsePattern& p, const GammaParams& params) {
  if (p.nnz() == 0) throw error(errc::empty_pattern, "gamma of an empty pattern");
  if (!(params.sigma > 0.0)) throw error(errc::invalid_argument, "sigma must be positive");
  if (!(params.cutoff_rho >= 1.0)) throw error(errc::invalid_argument, "cutoff_rho must be >= 1");
}

// kernel_lut[d] = exp(-d^2 / sigma^2); the 2-D kernel factors into a product
// of two lookups, so no exp() in the pair loops.
std::vector<double> kernel_lut(const SparsePattern& p, double sigma) {
  index_t maxd = std::max(p.n_rows, p.n_cols);
  std::vector<double> lut(static_cast<std::size_t>(maxd) + 1);
  for (index_t d = 0; d <= maxd; ++d)
    lut[d] = std::exp(-(static_cast<double>(d) * d) / (sigma * sigma));
  return lut;
}

}  // namespace

double gamma_exact(const SparsePattern& p, const GammaParams& params) {
  check_gamma_inputs(p, params);
  const std::size_t nnz = p.entries.size();
  std::vector<index_t> rows(nnz), cols(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    rows[e] = p.entries[e].first;
    cols[e] = p.entries[e].second;
  }
  const std::vector<double> lut = kernel_lut(p, params.sigma);

  double sum = 0.0;  // over unordered pairs i < j
  for (std::size_t i = 0; i < nnz; ++i) {
    const index_t ri = rows[i], ci = cols[i];
    for (std::size_t j = i + 1; j < nnz; ++j) {
      const double kr = lut[rows[j] - ri];  // rows are non-decreasing in canonical order
      if (kr == 0.0) break;                 // all later pairs underflow to exactly zero
      sum += kr * lut[std::abs(cols[j] - ci)];
    }
  }
  double total = 2.0 * sum;
  if (params.include_self_pairs) total += static_cast<double>(nnz);
  return total / (params.sigma * static_cast<double>(nnz));
}

double gamma_grid(const SparsePattern& p, const GammaParams& params) {
  check_gamma_inputs(p, params);
  const std::vector<double> lut = kernel_lut(p, params.sigma);
  const index_t reach = static_cast<index_t>(std::ceil(params.cutoff_rho));

  // bucket entries by sigma-sized grid cell, cells iterated in sorted order
  std::map<std::pair<index_t, index_t>, std::vector<index_t>> cells;
  for (std::size_t e = 0; e < p.entries.size(); ++e) {
    index_t cr = static_cast<index_t>(std::floor(p.entries[e].first / params.sigma));
    index_t cc = static_cast<index_t>(std::floor(p.entries[e].second / params.sigma));
    cells[{cr, cc}].push_back(static_cast<index_t>(e));
  }

  auto pair_sum = [&](const std::vector<index_t>& a, const std::vector<index_t>& b) {
    double s = 0.0;
    for (index_t ea : a) {
      const index_t ra = p.entries[ea].first, ca = p.entries[ea].second;
      for (index_t eb : b)
        s += lut[std::abs(p.entries[eb].first - ra)] * lut[std::abs(p.entries[eb].second - ca)];
    }
    return s;
  };

  double sum = 0.0;  // over unordered pairs
  for (const auto& [key, bucket] : cells) {
    // within-cell pairs
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      const index_t ra = p.entries[bucket[i]].first, ca = p.entries[bucket[i]].second;
      for (std::size_t j = i + 1; j < bucket.size(); ++j)
        sum += lut[std::abs(p.entries[bucket[j]].first - ra)] *
               lut[std::abs(p.entries[bucket[j]].second - ca)];
    }
    // cross-cell pairs: visit each unordered cell pair once, in a fixed order
    for (index_t dr = 0; dr <= reach; ++dr) {
      index_t dc_lo = (dr == 0) ? 1 : -reach;
      for (index_t dc = dc_lo; dc <= reach; ++dc) {
        auto it = cells.find({key.first + dr, key.second + dc});
        if (it != cells.end()) sum += pair_sum(bucket, it->second);
      }
    }
  }
  double total = 2.0 * sum;
  if (params.include_self_pairs) total += static_cast<double>(p.entries.size());
  return total / (params.sigma * static_cast<double>(p.entries.size()));
}

namespace {

struct BetaCandidate {
  PatchRect rect;
  std::uint64_t covers;  // bitmask over the nonzero list
  index_t area;
};

struct BetaSearch {
  const std::vector<BetaCandidate>* candidates;
  // candidate indices grouped by the lowest nonzero they cover
  std::vector<std::vector<int>> by_first_nz;
  std::uint64_t all_mask;
  double nnz;
  double best_score = 0.0;
  std::vector<int> best_choice;
  std::vector<int> chosen;

  void run(std::uint64_t covered, index_t patches, index_t area) {
    if (covered == all_mask) {
      double score = (nnz / static_cast<double>(area)) / static_cast<double>(patches);
      if (score > best_score) {
        best_score = score;
        best_choice = chosen;
      }
      return;
    }
    int first = std::countr_one(covered);  // lowest uncovered nonzero
    index_t remaining = static_cast<index_t>(std::popcount(all_mask & ~covered));
    // optimistic completion: one more patch, one cell per remaining nonzero
    double bound = (nnz / static_cast<double>(area + remaining)) / static_cast<double>(patches + 1);
    if (bound <= best_score) return;
    for (int idx : by_first_nz[first]) {
      const BetaCandidate& cand = (*candidates)[idx];
      bool disjoint = true;
      for (int c : chosen)
        if (cand.rect.overlaps((*candidates)[c].rect)) {
          disjoint = false;
          break;
        }
      if (!disjoint) continue;
      chosen.push_back(idx);
      run(covered | cand.covers, patches + 1, area + cand.area);
      chosen.pop_back();
    }
  }
};

}  // namespace

std::pair<double, PatchCovering> beta_bruteforce(const SparsePattern& p) {
  if (static_cast<long long>(p.n_rows) * p.n_cols > 64)
    throw error(errc::too_large, "beta oracle is capped at 64 cells");
  if (p.nnz() == 0) throw error(errc::empty_pattern, "beta of an empty pattern");

  const int nnz = static_cast<int>(p.entries.size());

  // Candidate patches: every rectangle that equals the bounding box of the
  // nonzeros it contains.  Shrinking any patch of a covering to the bounding
  // box of its nonzeros keeps the covering valid and never lowers the score,
  // so the optimum is attained among these.
  std::vector<BetaCandidate> candidates;
  for (index_t rl = 0; rl < p.n_rows; ++rl)
    for (index_t rh = rl + 1; rh <= p.n_rows; ++rh)
      for (index_t cl = 0; cl < p.n_cols; ++cl)
        for (index_t ch = cl + 1; ch <= p.n_cols; ++ch) {
          std::uint64_t mask = 0;
          index_t bb_rl = p.n_rows, bb_rh = 0, bb_cl = p.n_cols, bb_ch = 0;
          for (int e = 0; e < nnz; ++e) {
            const auto& [i, j] = p.entries[e];
            if (i >= rl && i < rh && j >= cl && j < ch) {
              mask |= std::uint64_t{1} << e;
              bb_rl = std::min(bb_rl, i);
              bb_rh = std::max(bb_rh, static_cast<index_t>(i + 1));
              bb_cl = std::min(bb_cl, j);
              bb_ch = std::max(bb_ch, static_cast<index_t>(j + 1));
            }
          }
          if (mask == 0) continue;
          if (bb_rl != rl || bb_rh != rh || bb_cl != cl || bb_ch != ch) continue;
          candidates.push_back({{rl, rh, cl, ch}, mask, (rh - rl) * (ch - cl)});
        }

  BetaSearch search;
  search.candidates = &candidates;
  search.by_first_nz.resize(nnz);
  for (int idx = 0; idx < static_cast<int>(candidates.size()); ++idx)
    search.by_first_nz[std::countr_zero(candidates[idx].covers)].push_back(idx);
  search.all_mask = (nnz == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << nnz) - 1);
  search.nnz = static_cast<double>(nnz);
  search.run(0, 0, 0);

  PatchCovering covering;
  for (int idx : search.best_choice) covering.patches.push_back(candidates[idx].rect);
  return {search.best_score, std::move(covering)};
}

std::tuple<Permutation, Permutation, double> best_ordering_bruteforce(const SparsePattern& p) {
  if (p.n_rows > 5 || p.n_cols > 5)
    throw error(errc::too_large, "ordering oracle is capped at 5x5");
  if (p.nnz() == 0) throw error(errc::empty_pattern, "ordering of an empty pattern");

  std::vector<index_t> rperm(p.n_rows), cperm(p.n_cols);
  for (index_t i = 0; i < p.n_rows; ++i) rperm[i] = i;

  double best = -1.0;
  std::vector<index_t> best_r, best_c;
  std::map<std::vector<std::pair<index_t, index_t>>, double> cache;
  do {
    for (index_t j = 0; j < p.n_cols; ++j) cperm[j] = j;
    do {
      std::vector<std::pair<index_t, index_t>> entries;
      entries.reserve(p.entries.size());
      for (const auto& [i, j] : p.entries) entries.emplace_back(rperm[i], cperm[j]);
      std::sort(entries.begin(), entries.end());
      auto [it, inserted] = cache.try_emplace(entries, 0.0);
      if (inserted) {
        SparsePattern q;
        q.n_rows = p.n_rows;
        q.n_cols = p.n_cols;
        q.entries = it->first;
        it->second = beta_bruteforce(q).first;
      }
      if (it->second > best) {
        best = it->second;
        best_r = rperm;
        best_c = cperm;
      }
    } while (std::next_permutation(cperm.begin(), cperm.end()));
  } while (std::next_permutation(rperm.begin(), rperm.end()));

  return {make_permutation(best_r), make_permutation(best_c), best};
}

index_t bandwidth(const SparsePattern& p) {
  index_t bw = 0;
  for (const auto& [i, j] : p.entries) bw = std::max(bw, static_cast<index_t>(std::abs(i - j)));
  return bw;
}

}  // namespace patchord
