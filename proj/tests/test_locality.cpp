#include <doctest.h>

#include <cmath>
#include <set>

#include "patchord/knn.hpp"
#include "patchord/locality.hpp"
#include "patchord/synth.hpp"

using namespace patchord;

namespace {

GammaParams sigma10() {
  GammaParams gp;
  gp.sigma = 10.0;
  return gp;
}

// independent witness check: disjoint in-bounds patches covering all nonzeros,
// scoring (nnz / total_area) / patch_count
void check_witness(const SparsePattern& p, const PatchCovering& cover, double score) {
  REQUIRE(!cover.patches.empty());
  double area = 0.0;
  for (std::size_t a = 0; a < cover.patches.size(); ++a) {
    const PatchRect& r = cover.patches[a];
    REQUIRE(r.row_lo < r.row_hi);
    REQUIRE(r.col_lo < r.col_hi);
    REQUIRE(r.row_hi <= p.n_rows);
    REQUIRE(r.col_hi <= p.n_cols);
    area += static_cast<double>(r.row_hi - r.row_lo) * (r.col_hi - r.col_lo);
    for (std::size_t b = a + 1; b < cover.patches.size(); ++b) {
      const PatchRect& s = cover.patches[b];
      const bool disjoint = r.row_hi <= s.row_lo || s.row_hi <= r.row_lo ||
                            r.col_hi <= s.col_lo || s.col_hi <= r.col_lo;
      CHECK(disjoint);
    }
  }
  for (const auto& [i, j] : p.entries) {
    bool covered = false;
    for (const PatchRect& r : cover.patches)
      covered = covered || (i >= r.row_lo && i < r.row_hi && j >= r.col_lo && j < r.col_hi);
    CHECK(covered);
  }
  const double recomputed =
      static_cast<double>(p.nnz()) / area / static_cast<double>(cover.patches.size());
  CHECK(score == doctest::Approx(recomputed).epsilon(1e-12));
}

SparsePattern random_pattern(index_t n, index_t entries_wanted, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::pair<index_t, index_t>> seen;
  while (static_cast<index_t>(seen.size()) < entries_wanted)
    seen.insert({static_cast<index_t>(rng.bounded(n)), static_cast<index_t>(rng.bounded(n))});
  return make_pattern(n, n, {seen.begin(), seen.end()});
}

}  // namespace

TEST_CASE("gamma of a single nonzero is the self-pair 1/sigma") {
  const SparsePattern p = make_pattern(3, 3, {{1, 2}});
  CHECK(gamma_exact(p, sigma10()) == doctest::Approx(0.1).epsilon(1e-15));
  GammaParams no_self = sigma10();
  no_self.include_self_pairs = false;
  CHECK(gamma_exact(p, no_self) == 0.0);
}

TEST_CASE("gamma of two nonzeros at unit distance matches the closed form") {
  const SparsePattern p = make_pattern(2, 2, {{0, 0}, {0, 1}});
  const double want = (1.0 + std::exp(-0.01)) / 10.0;  // 0.19900...
  CHECK(gamma_exact(p, sigma10()) == doctest::Approx(want).epsilon(1e-14));
  CHECK(gamma_exact(p, sigma10()) == doctest::Approx(0.1990).epsilon(1e-3));
}

TEST_CASE("self-pair contribution is exactly 1/sigma") {
  const SparsePattern p = random_pattern(12, 30, 4);
  GammaParams with = sigma10(), without = sigma10();
  without.include_self_pairs = false;
  CHECK(gamma_exact(p, with) - gamma_exact(p, without) ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("arrowhead gamma reproduces the reported value") {
  const SparsePattern arrow = gen_arrowhead(500, 20);
  const double g = gamma_exact(arrow, sigma10());
  CHECK(g == doctest::Approx(21.0).epsilon(0.5 / 21.0));  // reported 21.0 +- 0.5
  CHECK(g == doctest::Approx(21.0407).epsilon(1e-4));     // frozen from direct summation
}

TEST_CASE("gamma requires entries and sane parameters") {
  const SparsePattern empty = make_pattern(4, 4, {});
  CHECK_THROWS_AS(gamma_exact(empty, sigma10()), error);
  CHECK_THROWS_AS(gamma_grid(empty, sigma10()), error);
  GammaParams bad_sigma = sigma10();
  bad_sigma.sigma = 0.0;
  GammaParams bad_rho = sigma10();
  bad_rho.cutoff_rho = 0.5;
  const SparsePattern p = make_pattern(1, 1, {{0, 0}});
  CHECK_THROWS_AS(gamma_exact(p, bad_sigma), error);
  CHECK_THROWS_AS(gamma_grid(p, bad_rho), error);
}

TEST_CASE("grid estimator equals the exact sum when nothing is truncated") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SparsePattern p = random_pattern(9, 20, seed);
    GammaParams wide = sigma10();
    wide.cutoff_rho = 100.0;  // farthest pair is ~11.3 indices < 100 sigma away
    CHECK(gamma_grid(p, wide) == doctest::Approx(gamma_exact(p, wide)).epsilon(1e-13));
  }
}

TEST_CASE("grid estimator tracks the exact sum at the default truncation") {
  const SparsePattern arrow = gen_arrowhead(500, 20);
  const double exact = gamma_exact(arrow, sigma10());
  const double grid = gamma_grid(arrow, sigma10());
  CHECK(std::abs(grid - exact) / exact < 1e-3);
}

TEST_CASE("grid estimator is monotone in the truncation radius") {
  const SparsePattern p = random_pattern(40, 160, 9);
  GammaParams gp = sigma10();
  gp.sigma = 4.0;
  double prev = 0.0;
  for (double rho : {1.0, 1.5, 2.0, 3.0, 5.0, 8.0}) {
    gp.cutoff_rho = rho;
    const double g = gamma_grid(p, gp);
    CHECK(g >= prev - 1e-15 * std::max(1.0, g));
    prev = g;
  }
  CHECK(prev == doctest::Approx(gamma_exact(p, gp)).epsilon(1e-12));
}

TEST_CASE("gamma is symmetric under transposition") {
  for (std::uint64_t seed = 11; seed <= 13; ++seed) {
    const SparsePattern p = random_pattern(15, 45, seed);
    CHECK(gamma_exact(transpose(p), sigma10()) ==
          doctest::Approx(gamma_exact(p, sigma10())).epsilon(1e-12));
  }
}

TEST_CASE("gamma ignores index translation") {
  const SparsePattern p = random_pattern(10, 25, 21);
  std::vector<std::pair<index_t, index_t>> shifted;
  for (const auto& [i, j] : p.entries) shifted.emplace_back(i + 7, j + 3);
  const SparsePattern moved = make_pattern(25, 25, std::move(shifted));
  CHECK(gamma_exact(moved, sigma10()) == gamma_exact(p, sigma10()));  // bit-equal
  CHECK(gamma_grid(moved, sigma10()) ==
        doctest::Approx(gamma_grid(p, sigma10())).epsilon(1e-12));
}

TEST_CASE("gamma stays within its self-pair / coincidence bounds") {
  for (std::uint64_t seed = 31; seed <= 35; ++seed) {
    const SparsePattern p = random_pattern(20, 60, seed);
    const double g = gamma_exact(p, sigma10());
    CHECK(g >= 1.0 / 10.0);
    CHECK(g <= p.nnz() / 10.0);
  }
}

TEST_CASE("arrowhead gamma survives block permutations within 2 percent") {
  const index_t b = 20, nb = 25;
  const SparsePattern arrow = gen_arrowhead(nb * b, b);
  const double base = gamma_exact(arrow, sigma10());
  Rng rng(17);
  std::vector<index_t> blocks(nb);
  for (index_t q = 0; q < nb; ++q) blocks[q] = q;
  rng.shuffle(blocks);
  std::vector<index_t> fwd(nb * b);
  for (index_t i = 0; i < nb * b; ++i) fwd[i] = blocks[i / b] * b + i % b;
  const Permutation perm = make_permutation(fwd);
  const double shuffled = gamma_exact(permute(arrow, perm, perm), sigma10());
  CHECK(std::abs(shuffled - base) / base < 0.02);
}

TEST_CASE("grid estimator scales to a 2^14-point kNN pattern") {
  const PointSet pts = gen_gaussian_mixture(16384, 16, 32, 10.0, 0.5, 12);
  const SparsePattern full = symmetrize(pattern_from_knn(build_knn(pts, pts, 10)));
  GammaParams gp;
  gp.sigma = 15.0;
  const double g_full = gamma_grid(full, gp);
  CHECK(g_full > 0.0);
  CHECK(std::isfinite(g_full));

  // exact-vs-grid agreement audited on a subsample the quadratic sum can handle
  const PointSet sub = make_point_set(
      2048, pts.dim, {pts.coords.begin(), pts.coords.begin() + 2048 * pts.dim});
  const SparsePattern small = symmetrize(pattern_from_knn(build_knn(sub, sub, 10)));
  const double exact = gamma_exact(small, gp);
  CHECK(std::abs(gamma_grid(small, gp) - exact) / exact < 1e-3);
}

TEST_CASE("beta of the full 2x2 matrix is 1 with a single patch") {
  const SparsePattern p = make_pattern(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const auto [score, cover] = beta_bruteforce(p);
  CHECK(score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cover.patches.size() == 1);
  check_witness(p, cover, score);
}

TEST_CASE("beta of the 4x4 identity is 1/4") {
  const SparsePattern p = make_pattern(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const auto [score, cover] = beta_bruteforce(p);
  CHECK(score == doctest::Approx(0.25).epsilon(1e-12));
  check_witness(p, cover, score);
}

TEST_CASE("beta of the 2x2 anti-diagonal is 1/2") {
  const SparsePattern p = make_pattern(2, 2, {{0, 1}, {1, 0}});
  const auto [score, cover] = beta_bruteforce(p);
  CHECK(score == doctest::Approx(0.5).epsilon(1e-12));
  check_witness(p, cover, score);
}

TEST_CASE("beta of a dense 2x2 block plus a stray singleton is 5/9") {
  // the single bounding-box patch scores 1 * (5/9), beating the two-patch
  // covering {2x2 block, singleton} at (1/2) * (5/5)
  const SparsePattern p = make_pattern(3, 3, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}});
  const auto [score, cover] = beta_bruteforce(p);
  CHECK(score == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  check_witness(p, cover, score);
}

TEST_CASE("beta dominates simple handmade coverings") {
  for (std::uint64_t seed = 41; seed <= 44; ++seed) {
    const SparsePattern p = random_pattern(7, 12, seed);
    const auto [score, cover] = beta_bruteforce(p);
    check_witness(p, cover, score);
    // all-singletons covering scores 1/nnz; the bounding box scores density/1
    CHECK(score >= 1.0 / p.nnz() - 1e-12);
    index_t r_lo = p.n_rows, r_hi = 0, c_lo = p.n_cols, c_hi = 0;
    for (const auto& [i, j] : p.entries) {
      r_lo = std::min(r_lo, i);
      r_hi = std::max(r_hi, static_cast<index_t>(i + 1));
      c_lo = std::min(c_lo, j);
      c_hi = std::max(c_hi, static_cast<index_t>(j + 1));
    }
    const double bbox =
        static_cast<double>(p.nnz()) / ((r_hi - r_lo) * static_cast<double>(c_hi - c_lo));
    CHECK(score >= bbox - 1e-12);
  }
}

TEST_CASE("beta is invariant under pattern automorphisms") {
  // the anti-diagonal maps to itself under simultaneous row+column reversal
  const SparsePattern p = make_pattern(3, 3, {{0, 2}, {1, 1}, {2, 0}});
  const Permutation rev = make_permutation({2, 1, 0});
  const SparsePattern q = permute(p, rev, rev);
  REQUIRE(q.entries == p.entries);
  CHECK(beta_bruteforce(q).first == beta_bruteforce(p).first);
}

TEST_CASE("beta oracle enforces its size cap") {
  std::vector<std::pair<index_t, index_t>> diag;
  for (index_t i = 0; i < 9; ++i) diag.emplace_back(i, i);
  CHECK_THROWS_AS(beta_bruteforce(make_pattern(9, 9, diag)), error);
}

TEST_CASE("ordering oracle keeps the anti-diagonal at 1/2") {
  const SparsePattern p = make_pattern(2, 2, {{0, 1}, {1, 0}});
  const auto [rows, cols, best] = best_ordering_bruteforce(p);
  CHECK(best == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_bruteforce(permute(p, rows, cols)).first ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("ordering oracle ties at 1/3 on a 3x3 permutation pattern") {
  const SparsePattern p = make_pattern(3, 3, {{0, 1}, {1, 2}, {2, 0}});
  const auto [rows, cols, best] = best_ordering_bruteforce(p);
  CHECK(best == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(beta_bruteforce(permute(p, rows, cols)).first ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("ordering oracle scores the scrambled dense block") {
  // every row and column is populated, so the bounding box stays 3x3 under
  // any ordering and every ordering ties at 5/9
  const SparsePattern tidy = make_pattern(3, 3, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}});
  const Permutation scramble_r = make_permutation({2, 0, 1});
  const Permutation scramble_c = make_permutation({1, 2, 0});
  const SparsePattern scrambled = permute(tidy, scramble_r, scramble_c);
  const auto [rows, cols, best] = best_ordering_bruteforce(scrambled);
  CHECK(best == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(beta_bruteforce(permute(scrambled, rows, cols)).first ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("ordering oracle recovers two separated dense blocks") {
  // two 2x2 dense blocks; contiguous layout reaches (1/2)(8/8) = 1/2, while
  // the scramble below interleaves the empty row/column so its best covering
  // is the 8/25 bounding box
  const SparsePattern tidy = make_pattern(
      5, 5, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {3, 3}, {3, 4}, {4, 3}, {4, 4}});
  const Permutation scramble = make_permutation({0, 2, 1, 4, 3});
  const SparsePattern scrambled = permute(tidy, scramble, scramble);
  CHECK(beta_bruteforce(scrambled).first < 0.5 - 1e-9);
  const auto [rows, cols, best] = best_ordering_bruteforce(scrambled);
  CHECK(best == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_bruteforce(permute(scrambled, rows, cols)).first ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ordering oracle enforces its size cap") {
  std::vector<std::pair<index_t, index_t>> diag;
  for (index_t i = 0; i < 6; ++i) diag.emplace_back(i, i);
  CHECK_THROWS_AS(best_ordering_bruteforce(make_pattern(6, 6, diag)), error);
}

TEST_CASE("bandwidth of standard shapes") {
  CHECK(bandwidth(gen_banded(8, 1)) == 0);
  CHECK(bandwidth(gen_banded(8, 3)) == 1);
  CHECK(bandwidth(make_pattern(10, 10, {{0, 9}})) == 9);
  CHECK(bandwidth(make_pattern(4, 4, {})) == 0);
}
