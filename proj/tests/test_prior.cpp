#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "giant/geometric_prior.hpp"
#include "giant/rng.hpp"

using namespace giant;

TEST_CASE("kmeans with N == K reproduces the points exactly") {
  Matrix points(3, 2);
  points << 0.0, 0.0, 10.0, 0.0, 0.0, 10.0;
  const auto model = kmeans(points, 3, 7);
  CHECK(model.inertia == doctest::Approx(0.0));
  // Each point is its own centroid.
  for (int i = 0; i < 3; ++i) {
    const Vector p = points.row(i).transpose();
    const Vector c = model.centroids.row(model.assignment[i]).transpose();
    CHECK((p - c).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("kmeans recovers two well-separated blobs") {
  Rng rng(3);
  Matrix points(60, 2);
  for (int i = 0; i < 30; ++i)
    points.row(i) = (Vector(2) << 5.0, 5.0).finished().transpose() +
                    rng.gaussian_vector(2).transpose() * 0.05;
  for (int i = 30; i < 60; ++i)
    points.row(i) = (Vector(2) << -5.0, -5.0).finished().transpose() +
                    rng.gaussian_vector(2).transpose() * 0.05;
  const auto model = kmeans(points, 2, 19);
  // Each centroid within 0.1 of one blob mean.
  const Vector blob_a = points.topRows(30).colwise().mean().transpose();
  const Vector blob_b = points.bottomRows(30).colwise().mean().transpose();
  const double d0a = (model.centroids.row(0).transpose() - blob_a).norm();
  const double d0b = (model.centroids.row(0).transpose() - blob_b).norm();
  const Vector near0 = d0a < d0b ? blob_a : blob_b;
  const Vector near1 = d0a < d0b ? blob_b : blob_a;
  CHECK((model.centroids.row(0).transpose() - near0).norm() < 0.1);
  CHECK((model.centroids.row(1).transpose() - near1).norm() < 0.1);

  // Assignment is the nearest centroid for every point.
  for (Index i = 0; i < points.rows(); ++i) {
    const double own =
        (points.row(i) - model.centroids.row(model.assignment[i])).norm();
    for (int c = 0; c < 2; ++c)
      CHECK(own <= (points.row(i) - model.centroids.row(c)).norm() + 1e-12);
  }
}

TEST_CASE("kmeans is deterministic per seed and rejects N < K") {
  Rng rng(5);
  const Matrix points = rng.gaussian(10, 3);
  const auto a = kmeans(points, 4, 123);
  const auto b = kmeans(points, 4, 123);
  CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.assignment == b.assignment);
  CHECK_THROWS_AS(kmeans(points, 11, 1), std::invalid_argument);
}

TEST_CASE("prior_rho reproduces the hand-evaluated kernel example") {
  // K=2, alpha=1, distances 0 and 2 -> [1, e^-2] normalized.
  ClusterModel model;
  model.centroids.resize(2, 1);
  model.centroids << 0.0, 2.0;
  model.alpha = 1.0;
  Vector e(1);
  e << 0.0;
  const Vector rho = prior_rho(e, model);
  const double expect0 = 1.0 / (1.0 + std::exp(-2.0));
  CHECK(rho(0) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(rho(1) == doctest::Approx(0.1192).epsilon(1e-4));
  CHECK(rho(0) == doctest::Approx(expect0).epsilon(1e-12));
}

TEST_CASE("prior_rho: equidistant gives uniform; huge alpha flattens") {
  ClusterModel model;
  model.centroids.resize(3, 2);
  model.centroids << 1.0, 0.0, -0.5, std::sqrt(3.0) / 2.0, -0.5,
      -std::sqrt(3.0) / 2.0;  // unit circle, equidistant from origin
  model.alpha = 0.7;
  const Vector rho = prior_rho(Vector::Zero(2), model);
  for (int k = 0; k < 3; ++k)
    CHECK(rho(k) == doctest::Approx(1.0 / 3).epsilon(1e-12));

  ClusterModel wide;
  wide.centroids.resize(2, 1);
  wide.centroids << 0.0, 100.0;
  wide.alpha = 1e6;
  Vector e(1);
  e << 3.0;
  const Vector flat = prior_rho(e, wide);
  CHECK(std::abs(flat(0) - 0.5) < 1e-6);
  CHECK(std::abs(flat(1) - 0.5) < 1e-6);
}

TEST_CASE("prior_rho sums to one and respects monotonicity") {
  Rng rng(21);
  ClusterModel model;
  model.centroids = rng.gaussian(5, 4);
  model.alpha = 0.8;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector e = rng.gaussian_vector(4) * (1.0 + (trial % 7));
    const Vector rho = prior_rho(e, model);
    CHECK(rho.minCoeff() >= 0.0);
    CHECK(std::abs(rho.sum() - 1.0) <= 1e-12);
  }

  // Moving toward centroid 0 strictly increases rho_0.
  const Vector toward = model.centroids.row(0).transpose();
  Vector e = Vector::Zero(4);
  double prev = prior_rho(e, model)(0);
  for (int step = 1; step <= 4; ++step) {
    const Vector x = e + (toward - e) * (step / 4.0);
    const double cur = prior_rho(x, model)(0);
    CHECK(cur > prev);
    prev = cur;
  }

  // argmax rho equals the nearest-centroid assignment.
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.gaussian_vector(4);
    const Vector rho = prior_rho(x, model);
    Index arg = 0;
    rho.maxCoeff(&arg);
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 5; ++c) {
      const double d = (x - model.centroids.row(c).transpose()).squaredNorm();
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    CHECK(static_cast<int>(arg) == nearest);
  }
}

TEST_CASE("fit_alpha: fixed, degenerate floor, and median of constants") {
  Matrix points(4, 2);
  points << 0, 0, 0, 0, 1, 1, 1, 1;
  auto model = kmeans(points, 2, 3);

  CHECK(fit_alpha(points, model, AlphaStrategy::fixed, 1.0) == 1.0);
  CHECK_THROWS_AS(fit_alpha(points, model, AlphaStrategy::fixed, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_alpha(points, model, AlphaStrategy::fixed, -2.0),
                  std::invalid_argument);

  // All points sit on their centroids -> median distance 0 -> floored.
  CHECK(fit_alpha(points, model, AlphaStrategy::median_heuristic) ==
        doctest::Approx(1e-6));

  // Points at distance exactly 2 from their centroid -> alpha = 2.
  ClusterModel fixed_model;
  fixed_model.centroids = Matrix::Zero(1, 2);
  Matrix ring(4, 2);
  ring << 2, 0, -2, 0, 0, 2, 0, -2;
  fixed_model.assignment = {0, 0, 0, 0};
  CHECK(fit_alpha(ring, fixed_model, AlphaStrategy::median_heuristic) ==
        doctest::Approx(2.0));
}
