#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "patchord/pca.hpp"

using namespace patchord;

namespace {

PointSet random_points(index_t n, index_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coords(static_cast<std::size_t>(n) * dim);
  for (double& c : coords) c = rng.normal();
  return make_point_set(n, dim, std::move(coords));
}

Eigen::MatrixXd to_eigen(const PointSet& pts) {
  Eigen::MatrixXd x(pts.n_points, pts.dim);
  for (index_t i = 0; i < pts.n_points; ++i)
    for (index_t a = 0; a < pts.dim; ++a) x(i, a) = pts.point(i)[a];
  return x;
}

// largest principal angle between the fitted axes and a reference basis
double subspace_angle(const Embedding& e, const Eigen::MatrixXd& reference) {
  const auto d = static_cast<index_t>(reference.cols());
  Eigen::MatrixXd cross(d, d);
  for (index_t a = 0; a < d; ++a)
    for (index_t b = 0; b < d; ++b) {
      double dot = 0.0;
      for (index_t c = 0; c < e.dim_in; ++c) dot += e.axis(a)[c] * reference(c, b);
      cross(a, b) = dot;
    }
  const double s_min = cross.jacobiSvd().singularValues().minCoeff();
  return std::acos(std::clamp(s_min, -1.0, 1.0));
}

void check_embedding_invariants(const Embedding& e) {
  for (index_t a = 0; a < e.dim_out; ++a)
    for (index_t b = a; b < e.dim_out; ++b) {
      double dot = 0.0;
      for (index_t c = 0; c < e.dim_in; ++c) dot += e.axis(a)[c] * e.axis(b)[c];
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  double sum_sq = 0.0;
  for (index_t a = 0; a < e.dim_out; ++a) {
    CHECK(e.singular_values[a] >= 0.0);
    if (a > 0) CHECK(e.singular_values[a] <= e.singular_values[a - 1] + 1e-12);
    sum_sq += e.singular_values[a] * e.singular_values[a];
  }
  CHECK(sum_sq <= e.total_sq_norm * (1.0 + 1e-8));
}

}  // namespace

TEST_CASE("rank-1 data on the x axis yields that axis") {
  std::vector<double> coords;
  for (index_t i = 0; i < 20; ++i) {
    coords.push_back(static_cast<double>(i) - 9.5);
    coords.push_back(0.0);
    coords.push_back(0.0);
  }
  const Embedding e = fit_pca(make_point_set(20, 3, std::move(coords)), 1);
  check_embedding_invariants(e);
  CHECK(std::abs(std::abs(e.axis(0)[0]) - 1.0) < 1e-10);
  CHECK(std::abs(e.axis(0)[1]) < 1e-10);
  CHECK(std::abs(e.axis(0)[2]) < 1e-10);
  CHECK(e.axis(0)[0] > 0.0);  // sign convention: largest component positive
  CHECK(variance_ratio(e) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rank-2 data in 10 dimensions is captured exactly by two axes") {
  Rng rng(5);
  std::vector<double> u(10), v(10);
  for (double& c : u) c = rng.normal();
  for (double& c : v) c = rng.normal();
  std::vector<double> coords;
  for (index_t i = 0; i < 60; ++i) {
    const double a = rng.normal(), b = rng.normal();
    for (index_t c = 0; c < 10; ++c) coords.push_back(a * u[c] + b * v[c]);
  }
  const PointSet pts = make_point_set(60, 10, std::move(coords));
  const Embedding e = fit_pca(pts, 2);
  check_embedding_invariants(e);
  CHECK(variance_ratio(e) == doctest::Approx(1.0).epsilon(1e-10));

  // the plane is reproduced: pairwise distances survive the projection
  const PointSet proj = project(pts, e);
  for (index_t i = 0; i < 10; ++i)
    for (index_t j = i + 1; j < 10; ++j) {
      double d_in = 0.0, d_out = 0.0;
      for (index_t c = 0; c < 10; ++c) {
        const double d = pts.point(i)[c] - pts.point(j)[c];
        d_in += d * d;
      }
      for (index_t c = 0; c < 2; ++c) {
        const double d = proj.point(i)[c] - proj.point(j)[c];
        d_out += d * d;
      }
      CHECK(d_out == doctest::Approx(d_in).epsilon(1e-9));
    }
}

TEST_CASE("fitted subspace matches the dense eigensolver oracle") {
  const PointSet pts = random_points(100, 10, 11);
  const Embedding e = fit_pca(pts, 3);
  check_embedding_invariants(e);
  REQUIRE(e.converged);

  Eigen::MatrixXd x = to_eigen(pts);
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::MatrixXd top = eig.eigenvectors().rightCols(3);  // ascending order
  CHECK(subspace_angle(e, top) < 1e-6);

  // singular values square to the top eigenvalues
  for (index_t a = 0; a < 3; ++a) {
    const double lambda = eig.eigenvalues()(9 - a);
    CHECK(e.singular_values[a] * e.singular_values[a] ==
          doctest::Approx(lambda).epsilon(1e-8));
  }
}

TEST_CASE("projection is centered and contractive") {
  const PointSet pts = random_points(50, 6, 13);
  const Embedding e = fit_pca(pts, 2);
  std::vector<double> mean_coords(e.mean.begin(), e.mean.end());
  const PointSet mean_pt = make_point_set(1, 6, std::move(mean_coords));
  const PointSet origin = project(mean_pt, e);
  CHECK(std::abs(origin.point(0)[0]) < 1e-12);
  CHECK(std::abs(origin.point(0)[1]) < 1e-12);

  const PointSet proj = project(pts, e);
  for (index_t i = 0; i < 50; ++i) {
    double in2 = 0.0, out2 = 0.0;
    for (index_t c = 0; c < 6; ++c) {
      const double d = pts.point(i)[c] - e.mean[c];
      in2 += d * d;
    }
    for (index_t c = 0; c < 2; ++c) out2 += proj.point(i)[c] * proj.point(i)[c];
    CHECK(out2 <= in2 * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("projection is translation invariant") {
  const PointSet pts = random_points(40, 5, 17);
  PointSet shifted = pts;
  for (index_t i = 0; i < 40; ++i)
    for (index_t c = 0; c < 5; ++c) shifted.point(i)[c] += 100.0 + c;
  const PointSet a = project(pts, fit_pca(pts, 2));
  const PointSet b = project(shifted, fit_pca(shifted, 2));
  for (std::size_t q = 0; q < a.coords.size(); ++q)
    CHECK(a.coords[q] == doctest::Approx(b.coords[q]).epsilon(1e-7));
}

TEST_CASE("project validates dimensions") {
  const PointSet pts = random_points(30, 5, 19);
  const Embedding e = fit_pca(pts, 2);
  CHECK_THROWS_AS(project(random_points(10, 4, 1), e), error);
}

TEST_CASE("fit_pca is bitwise deterministic under a fixed seed") {
  const PointSet pts = random_points(80, 12, 23);
  const Embedding a = fit_pca(pts, 3, 1e-9, 1000, 42);
  const Embedding b = fit_pca(pts, 3, 1e-9, 1000, 42);
  CHECK(a.axes == b.axes);
  CHECK(a.singular_values == b.singular_values);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("reconstruction error complements the captured variance") {
  const PointSet pts = random_points(70, 8, 29);
  const Embedding e = fit_pca(pts, 3);
  REQUIRE(e.converged);
  const PointSet proj = project(pts, e);
  double err = 0.0;
  for (index_t i = 0; i < 70; ++i)
    for (index_t c = 0; c < 8; ++c) {
      double rec = e.mean[c];
      for (index_t a = 0; a < 3; ++a) rec += proj.point(i)[a] * e.axis(a)[c];
      const double d = pts.point(i)[c] - rec;
      err += d * d;
    }
  double captured = 0.0;
  for (double s : e.singular_values) captured += s * s;
  CHECK(err == doctest::Approx(e.total_sq_norm - captured).epsilon(1e-6));
}

TEST_CASE("degenerate data is rejected") {
  const PointSet same = make_point_set(5, 3, std::vector<double>(15, 2.5));
  CHECK_THROWS_AS(fit_pca(same, 1), error);
  try {
    fit_pca(same, 1);
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate_data);
  }
}

TEST_CASE("fit_pca validates rank and tolerance arguments") {
  const PointSet pts = random_points(10, 3, 31);
  CHECK_THROWS_AS(fit_pca(pts, 0), error);
  CHECK_THROWS_AS(fit_pca(pts, 4), error);
  CHECK_THROWS_AS(fit_pca(pts, 2, 0.0), error);
}

TEST_CASE("isotropic data spreads variance evenly") {
  const PointSet pts = random_points(4000, 8, 37);
  const Embedding e = fit_pca(pts, 1);
  const double r = variance_ratio(e);
  CHECK(r > 0.08);
  CHECK(r < 0.20);  // about 1/8 plus sampling noise
}

TEST_CASE("full-dimension embedding captures everything") {
  const PointSet pts = random_points(30, 4, 41);
  const Embedding e = fit_pca(pts, 4);
  check_embedding_invariants(e);
  CHECK(variance_ratio(e) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("choose_dim picks the smallest sufficient dimension") {
  Rng rng(43);
  std::vector<double> coords;
  for (index_t i = 0; i < 50; ++i) {
    const double a = rng.normal(), b = rng.normal();
    coords.push_back(a);
    coords.push_back(b);
    coords.push_back(0.3 * a - 0.8 * b);  // linear combination, still rank 2
    coords.push_back(a + b);
  }
  const PointSet rank2 = make_point_set(50, 4, std::move(coords));
  CHECK(choose_dim(rank2, 0.99, 3) == 2);
  CHECK(choose_dim(rank2, 0.0, 3) == 1);  // boundary: any share suffices
  const PointSet full = random_points(60, 6, 47);
  CHECK(choose_dim(full, 1.0, 3) == 3);  // cap when nothing reaches the share
}
