#include "patchord/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace patchord {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric p x p matrix (p is tiny).
// Returns eigenvalues in `evals` (descending) with matching eigenvector
// columns in `evecs` (p x p, column-major by eigenvalue rank).
void jacobi_eig(std::vector<double> a, index_t p, std::vector<double>& evals,
                std::vector<double>& evecs) {
  std::vector<double> v(static_cast<std::size_t>(p) * p, 0.0);
  for (index_t i = 0; i < p; ++i) v[i * p + i] = 1.0;
  auto at = [&](std::vector<double>& m, index_t i, index_t j) -> double& { return m[i * p + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (index_t i = 0; i < p; ++i)
      for (index_t j = 0; j < p; ++j)
        (i == j ? diag : off) += a[i * p + j] * a[i * p + j];
    if (off <= 1e-30 * (diag + 1e-300)) break;
    for (index_t i = 0; i < p - 1; ++i)
      for (index_t j = i + 1; j < p; ++j) {
        double apq = at(a, i, j);
        if (apq == 0.0) continue;
        double theta = (at(a, j, j) - at(a, i, i)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (index_t r = 0; r < p; ++r) {
          double ari = at(a, r, i), arj = at(a, r, j);
          at(a, r, i) = c * ari - s * arj;
          at(a, r, j) = s * ari + c * arj;
        }
        for (index_t r = 0; r < p; ++r) {
          double air = at(a, i, r), ajr = at(a, j, r);
          at(a, i, r) = c * air - s * ajr;
          at(a, j, r) = s * air + c * ajr;
        }
        for (index_t r = 0; r < p; ++r) {
          double vri = at(v, r, i), vrj = at(v, r, j);
          at(v, r, i) = c * vri - s * vrj;
          at(v, r, j) = s * vri + c * vrj;
        }
      }
  }
  std::vector<index_t> rank(p);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](index_t x, index_t y) { return a[x * p + x] > a[y * p + y]; });
  evals.resize(p);
  evecs.assign(static_cast<std::size_t>(p) * p, 0.0);
  for (index_t o = 0; o < p; ++o) {
    evals[o] = a[rank[o] * p + rank[o]];
    for (index_t r = 0; r < p; ++r) evecs[r * p + o] = v[r * p + rank[o]];
  }
}

// Modified Gram-Schmidt on the p columns of the dim x p matrix `m`.
// Columns that collapse into the span of their predecessors (the norm drops
// by ~machine epsilon relative to where it started) are refilled from the
// rng so the basis stays full rank; normalizing such a residual would amplify
// cancellation noise into a column with O(1) overlap against the basis.
void orthonormalize(std::vector<double>& m, index_t dim, index_t p, Rng& rng) {
  for (index_t a = 0; a < p; ++a) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      double norm0 = 0.0;
      for (index_t r = 0; r < dim; ++r) norm0 += m[r * p + a] * m[r * p + a];
      norm0 = std::sqrt(norm0);
      double norm = 0.0;
      if (norm0 > 0.0) {
        // two projection passes: the second repairs the orthogonality a
        // single pass loses when the column is nearly dependent
        for (int pass = 0; pass < 2; ++pass) {
          for (index_t b = 0; b < a; ++b) {
            double dot = 0.0;
            for (index_t r = 0; r < dim; ++r) dot += m[r * p + a] * m[r * p + b];
            for (index_t r = 0; r < dim; ++r) m[r * p + a] -= dot * m[r * p + b];
          }
        }
        for (index_t r = 0; r < dim; ++r) norm += m[r * p + a] * m[r * p + a];
        norm = std::sqrt(norm);
      }
      if (norm > 1e-12 * norm0 && norm > 1e-150) {
        for (index_t r = 0; r < dim; ++r) m[r * p + a] /= norm;
        break;
      }
      for (index_t r = 0; r < dim; ++r) m[r * p + a] = rng.normal();
    }
  }
}

// cosine of the largest principal angle between the d leading columns of two
// orthonormal dim x p bases = smallest singular value of their cross-Gramian
double min_cross_singular(const std::vector<double>& u, const std::vector<double>& w, index_t dim,
                          index_t p, index_t d) {
  std::vector<double> g(static_cast<std::size_t>(d) * d, 0.0);
  for (index_t a = 0; a < d; ++a)
    for (index_t b = 0; b < d; ++b) {
      double dot = 0.0;
      for (index_t r = 0; r < dim; ++r) dot += u[r * p + a] * w[r * p + b];
      g[a * d + b] = dot;
    }
  std::vector<double> gtg(static_cast<std::size_t>(d) * d, 0.0);
  for (index_t a = 0; a < d; ++a)
    for (index_t b = 0; b < d; ++b) {
      double dot = 0.0;
      for (index_t r = 0; r < d; ++r) dot += g[r * d + a] * g[r * d + b];
      gtg[a * d + b] = dot;
    }
  std::vector<double> evals, evecs;
  jacobi_eig(gtg, d, evals, evecs);
  return std::sqrt(std::max(0.0, evals[d - 1]));
}

void fix_axis_signs(Embedding& e) {
  for (index_t a = 0; a < e.dim_out; ++a) {
    double* ax = e.axes.data() + static_cast<std::size_t>(a) * e.dim_in;
    index_t arg = 0;
    for (index_t r = 1; r < e.dim_in; ++r)
      if (std::abs(ax[r]) > std::abs(ax[arg])) arg = r;
    if (ax[arg] < 0.0)
      for (index_t r = 0; r < e.dim_in; ++r) ax[r] = -ax[r];
  }
}

}  // namespace

Embedding fit_pca(const PointSet& points, index_t d, double tol, index_t max_iter,
                  std::uint64_t seed) {
  const index_t n = points.n_points, D = points.dim;
  if (d < 1 || d > std::min(D, n))
    throw error(errc::invalid_argument, "d must be in [1, min(dim, n_points)]");
  if (!(tol > 0.0)) throw error(errc::invalid_argument, "tol must be positive");

  Embedding e;
  e.dim_in = D;
  e.dim_out = d;
  e.mean.assign(D, 0.0);
  for (index_t i = 0; i < n; ++i) {
    const double* x = points.point(i);
    for (index_t r = 0; r < D; ++r) e.mean[r] += x[r];
  }
  for (index_t r = 0; r < D; ++r) e.mean[r] /= static_cast<double>(n);

  std::vector<double> xc(static_cast<std::size_t>(n) * D);
  double total = 0.0;
  for (index_t i = 0; i < n; ++i) {
    const double* x = points.point(i);
    double* row = xc.data() + static_cast<std::size_t>(i) * D;
    for (index_t r = 0; r < D; ++r) {
      row[r] = x[r] - e.mean[r];
      total += row[r] * row[r];
    }
  }
  e.total_sq_norm = total;
  if (total == 0.0) throw error(errc::degenerate_data, "all points identical; axes undefined");

  if (d == D) {
    // exact identity-minus-centering case: axis-aligned directions ordered by
    // decreasing column variance so the singular values stay non-increasing
    std::vector<double> colsq(D, 0.0);
    for (index_t i = 0; i < n; ++i) {
      const double* row = xc.data() + static_cast<std::size_t>(i) * D;
      for (index_t r = 0; r < D; ++r) colsq[r] += row[r] * row[r];
    }
    std::vector<index_t> rank(D);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](index_t x, index_t y) { return colsq[x] > colsq[y]; });
    e.axes.assign(static_cast<std::size_t>(D) * D, 0.0);
    e.singular_values.resize(D);
    for (index_t a = 0; a < D; ++a) {
      e.axes[static_cast<std::size_t>(a) * D + rank[a]] = 1.0;
      e.singular_values[a] = std::sqrt(colsq[rank[a]]);
    }
    e.converged = true;
    e.iterations = 0;
    return e;
  }

  const index_t p = std::min<index_t>(D, d + 2);  // small oversampling block
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(D) * p);
  for (double& x : v) x = rng.normal();
  orthonormalize(v, D, p, rng);

  std::vector<double> b(static_cast<std::size_t>(n) * p);
  std::vector<double> w(static_cast<std::size_t>(D) * p);
  auto apply_covariance = [&](const std::vector<double>& in, std::vector<double>& out) {
    // b = Xc * in ; out = Xc^T * b
    std::fill(b.begin(), b.end(), 0.0);
    for (index_t i = 0; i < n; ++i) {
      const double* row = xc.data() + static_cast<std::size_t>(i) * D;
      double* bi = b.data() + static_cast<std::size_t>(i) * p;
      for (index_t r = 0; r < D; ++r) {
        const double x = row[r];
        const double* vr = in.data() + static_cast<std::size_t>(r) * p;
        for (index_t a = 0; a < p; ++a) bi[a] += x * vr[a];
      }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (index_t i = 0; i < n; ++i) {
      const double* row = xc.data() + static_cast<std::size_t>(i) * D;
      const double* bi = b.data() + static_cast<std::size_t>(i) * p;
      for (index_t r = 0; r < D; ++r) {
        double* wr = out.data() + static_cast<std::size_t>(r) * p;
        const double x = row[r];
        for (index_t a = 0; a < p; ++a) wr[a] += x * bi[a];
      }
    }
  };

  e.converged = false;
  for (index_t it = 1; it <= max_iter; ++it) {
    apply_covariance(v, w);
    orthonormalize(w, D, p, rng);
    double cos_angle = min_cross_singular(v, w, D, p, d);
    v.swap(w);
    e.iterations = it;
    if (std::acos(std::clamp(cos_angle, 0.0, 1.0)) < tol) {
      e.converged = true;
      break;
    }
  }

  // Rayleigh-Ritz on the converged block: eigendecompose (Xc V)^T (Xc V)
  std::fill(b.begin(), b.end(), 0.0);
  for (index_t i = 0; i < n; ++i) {
    const double* row = xc.data() + static_cast<std::size_t>(i) * D;
    double* bi = b.data() + static_cast<std::size_t>(i) * p;
    for (index_t r = 0; r < D; ++r) {
      const double x = row[r];
      const double* vr = v.data() + static_cast<std::size_t>(r) * p;
      for (index_t a = 0; a < p; ++a) bi[a] += x * vr[a];
    }
  }
  std::vector<double> gram(static_cast<std::size_t>(p) * p, 0.0);
  for (index_t i = 0; i < n; ++i) {
    const double* bi = b.data() + static_cast<std::size_t>(i) * p;
    for (index_t a = 0; a < p; ++a)
      for (index_t c = 0; c < p; ++c) gram[a * p + c] += bi[a] * bi[c];
  }
  std::vector<double> evals, evecs;
  jacobi_eig(gram, p, evals, evecs);

  e.axes.assign(static_cast<std::size_t>(d) * D, 0.0);
  e.singular_values.resize(d);
  for (index_t a = 0; a < d; ++a) {
    e.singular_values[a] = std::sqrt(std::max(0.0, evals[a]));
    double* ax = e.axes.data() + static_cast<std::size_t>(a) * D;
    for (index_t r = 0; r < D; ++r) {
      double acc = 0.0;
      for (index_t c = 0; c < p; ++c) acc += v[r * p + c] * evecs[c * p + a];
      ax[r] = acc;
    }
  }
  fix_axis_signs(e);
  return e;
}

PointSet project(const PointSet& points, const Embedding& e) {
  if (points.dim != e.dim_in)
    throw error(errc::dim_mismatch, "point dim " + std::to_string(points.dim) +
                                        " != embedding dim_in " + std::to_string(e.dim_in));
  std::vector<double> out(static_cast<std::size_t>(points.n_points) * e.dim_out);
  for (index_t i = 0; i < points.n_points; ++i) {
    const double* x = points.point(i);
    double* y = out.data() + static_cast<std::size_t>(i) * e.dim_out;
    for (index_t a = 0; a < e.dim_out; ++a) {
      const double* ax = e.axis(a);
      double acc = 0.0;
      for (index_t r = 0; r < e.dim_in; ++r) acc += (x[r] - e.mean[r]) * ax[r];
      y[a] = acc;
    }
  }
  return make_point_set(points.n_points, e.dim_out, std::move(out));
}

double variance_ratio(const Embedding& e) {
  if (!(e.total_sq_norm > 0.0)) throw error(errc::degenerate_data, "zero total variance");
  double s = 0.0;
  for (double sv : e.singular_values) s += sv * sv;
  return std::clamp(s / e.total_sq_norm, 0.0, 1.0);
}

index_t choose_dim(const PointSet& points, double ratio_tol, index_t d_max) {
  if (ratio_tol < 0.0 || ratio_tol > 1.0)
    throw error(errc::invalid_argument, "ratio_tol must be in [0, 1]");
  if (d_max < 1) throw error(errc::invalid_argument, "d_max must be >= 1");
  const index_t d_eff = std::min({d_max, points.dim, points.n_points});
  Embedding e = fit_pca(points, d_eff);
  if (!(e.total_sq_norm > 0.0)) throw error(errc::degenerate_data, "zero total variance");
  double s = 0.0;
  for (index_t d = 1; d <= d_eff; ++d) {
    s += e.singular_values[d - 1] * e.singular_values[d - 1];
    if (s / e.total_sq_norm >= ratio_tol) return d;
  }
  return d_max;
}

}  // namespace patchord
