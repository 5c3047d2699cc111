#include <doctest.h>

#include <cmath>

#include "moral/cluster.hpp"
#include "moral/error.hpp"
#include "moral/rng.hpp"
#include "moral/serial.hpp"
#include "support.hpp"

using namespace moral;

namespace {

// Gaussian blobs with one truth label per blob.
std::pair<Matrix, std::vector<int>> make_blobs(std::size_t blobs, std::size_t per_blob,
                                               std::size_t dim, double center_scale, double sigma,
                                               std::uint64_t seed) {
  Rng rng(seed);
  Matrix centers(blobs, dim);
  for (double& v : centers.data()) v = rng.normal() * center_scale;
  Matrix points(blobs * per_blob, dim);
  std::vector<int> truth(blobs * per_blob);
  for (std::size_t b = 0; b < blobs; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      const std::size_t row = b * per_blob + i;
      truth[row] = static_cast<int>(b);
      for (std::size_t c = 0; c < dim; ++c)
        points(row, c) = centers(b, c) + rng.normal() * sigma;
    }
  }
  return {points, truth};
}

}  // namespace

TEST_CASE("kmeans exact fit on well-separated points") {
  Matrix points(4, 2);
  points(0, 0) = 0.0;
  points(1, 0) = 10.0;
  points(2, 0) = 20.0;
  points(3, 0) = 30.0;
  KMeansConfig cfg;
  cfg.k = 4;
  const auto res = kmeans(points, cfg);
  CHECK(res.inertia == doctest::Approx(0.0));
  std::set<int> distinct(res.assignment.begin(), res.assignment.end());
  CHECK(distinct.size() == 4);
}

TEST_CASE("kmeans two tight blobs recovers the means") {
  auto [points, truth] = make_blobs(2, 10, 2, 0.0, 0.01, 7);
  // move blob centers explicitly to 0 and 100
  for (std::size_t i = 0; i < 10; ++i) points(i, 0) += 0.0;
  for (std::size_t i = 10; i < 20; ++i) points(i, 0) += 100.0;

  // per-blob means computed directly
  double mean0 = 0.0, mean1 = 0.0;
  for (std::size_t i = 0; i < 10; ++i) mean0 += points(i, 0);
  for (std::size_t i = 10; i < 20; ++i) mean1 += points(i, 0);
  mean0 /= 10.0;
  mean1 /= 10.0;

  KMeansConfig cfg;
  cfg.k = 2;
  const auto res = kmeans(points, cfg);
  const double lo = std::min(res.centroids(0, 0), res.centroids(1, 0));
  const double hi = std::max(res.centroids(0, 0), res.centroids(1, 0));
  CHECK(lo == doctest::Approx(std::min(mean0, mean1)).epsilon(0.1));
  CHECK(hi == doctest::Approx(std::max(mean0, mean1)).epsilon(0.1));
}

TEST_CASE("kmeans deterministic under identical config") {
  Rng rng(19);
  const Matrix points = testsupport::random_matrix(80, 4, rng);
  KMeansConfig cfg;
  cfg.k = 5;
  cfg.seed = 99;
  const auto a = kmeans(points, cfg);
  const auto b = kmeans(points, cfg);
  CHECK(a.assignment == b.assignment);
  CHECK(a.inertia == b.inertia);
  CHECK(a.centroids == b.centroids);
}

TEST_CASE("kmeans parallel path agrees with the serial reference") {
  Rng rng(29);
  const Matrix points = testsupport::random_matrix(120, 3, rng);
  for (int k : {2, 5, 9}) {
    KMeansConfig cfg;
    cfg.k = k;
    cfg.seed = 4;
    const auto fast = kmeans(points, cfg);
    const auto slow = serial::kmeans(points, cfg);
    CHECK(fast.assignment == slow.assignment);
    CHECK(fast.inertia == doctest::Approx(slow.inertia).epsilon(1e-12));
  }
}

TEST_CASE("kmeans errors when k exceeds n") {
  Matrix points(3, 1);
  KMeansConfig cfg;
  cfg.k = 4;
  CHECK_THROWS_AS(kmeans(points, cfg), data_error);
}

TEST_CASE("kmeans empty-cluster repair keeps k non-empty clusters") {
  // 6 points, two coincident piles: k=4 forces repairs
  Matrix points(6, 1);
  for (int i = 0; i < 3; ++i) points(static_cast<std::size_t>(i), 0) = 0.0;
  for (int i = 3; i < 6; ++i) points(static_cast<std::size_t>(i), 0) = 50.0 + i;
  KMeansConfig cfg;
  cfg.k = 4;
  const auto res = kmeans(points, cfg);
  std::set<int> seen(res.assignment.begin(), res.assignment.end());
  CHECK(static_cast<int>(seen.size()) == 4);
}

TEST_CASE("k_sweep finds blob count on separated data") {
  auto [points, truth] = make_blobs(10, 12, 8, 10.0, 0.3, 3);
  const auto sweep = k_sweep(points, truth, 42);
  CHECK(sweep.k_hat == 10);
  CHECK(sweep.at_k(10).purity >= 0.95);
  CHECK(sweep.per_k.size() == 14);  // K in [2, 15]
  CHECK(sweep.per_k.front().k == 2);
  CHECK(sweep.per_k.back().k == 15);
  // the explicit K=10 report is part of the sweep
  CHECK(sweep.at_k(10).k == 10);
  CHECK(sweep.assignment_at_k(10).size() == points.rows());
}

TEST_CASE("k_sweep on an isotropic cloud keeps silhouette near zero") {
  Rng rng(41);
  const Matrix points = testsupport::random_matrix(150, 6, rng);
  std::vector<int> truth(150);
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 10);
  const auto sweep = k_sweep(points, truth, 42);
  for (const auto& q : sweep.per_k) CHECK(std::abs(q.silhouette) < 0.2);
}

TEST_CASE("k_sweep truncates the range to n and validates input") {
  auto [points, truth] = make_blobs(2, 3, 2, 5.0, 0.1, 11);  // n = 6
  const auto sweep = k_sweep(points, truth, 1);
  CHECK(sweep.per_k.back().k == 6);
  // purity at K = n is 1 on any input
  CHECK(sweep.at_k(6).purity == doctest::Approx(1.0));

  Matrix two(2, 2);
  const std::vector<int> t2 = {0, 1};
  CHECK_THROWS_AS(k_sweep(two, t2, 1), data_error);
}

TEST_CASE("kmeans winner improves monotonically with more restarts") {
  // Restart r always draws the substream mix(seed, r), so the first three
  // runs of a 10-restart sweep are exactly the runs of a 3-restart sweep.
  Rng rng(59);
  const Matrix points = testsupport::random_matrix(60, 2, rng);
  KMeansConfig cfg;
  cfg.k = 4;
  cfg.seed = 8;
  cfg.restarts = 3;
  const double best_of_three = kmeans(points, cfg).inertia;
  cfg.restarts = 10;
  CHECK(kmeans(points, cfg).inertia <= best_of_three + 1e-12);
}
