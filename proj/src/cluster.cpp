#include "moral/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "moral/error.hpp"
#include "moral/metrics.hpp"
#include "moral/rng.hpp"

namespace moral {

namespace {

// k-means++ D^2 seeding with explicit prefix-sum sampling.
Matrix plus_plus_init(const Matrix& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  Matrix centroids(static_cast<std::size_t>(k), d);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = static_cast<std::size_t>(rng.bounded(n));
  auto copy_centroid = [&](std::size_t c, std::size_t p) {
    auto dst = centroids.row(c);
    const auto src = points.row(p);
    std::copy(src.begin(), src.end(), dst.begin());
  };
  copy_centroid(0, first);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(c - 1)));
      min_d2[i] = std::min(min_d2[i], d2);
      total += min_d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      // All remaining points coincide with chosen centroids.
      chosen = static_cast<std::size_t>(rng.bounded(n));
    }
    copy_centroid(static_cast<std::size_t>(c), chosen);
  }
  return centroids;
}

void assign_points(const Matrix& points, const Matrix& centroids, std::vector<int>& assignment) {
  const std::size_t n = points.rows();
  const std::size_t k = centroids.rows();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d2 = squared_distance(points.row(i), centroids.row(c));
      if (d2 < best) {  // ties keep the lowest centroid index
        best = d2;
        best_c = static_cast<int>(c);
      }
    }
    assignment[i] = best_c;
  }
}

KMeansResult lloyd_run(const Matrix& points, const KMeansConfig& cfg, std::uint64_t run_seed) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const auto k = static_cast<std::size_t>(cfg.k);

  Rng rng(run_seed);
  KMeansResult res;
  res.centroids = plus_plus_init(points, cfg.k, rng);
  res.assignment.assign(n, 0);

  Matrix sums(k, d);
  std::vector<std::size_t> counts(k);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    res.iterations = iter + 1;
    assign_points(points, res.centroids, res.assignment);

    // Serial accumulation in point order keeps the update bit-reproducible
    // for any thread count.
    sums.fill(0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      ++counts[c];
      auto dst = sums.row(c);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }

    // Repair empty clusters by stealing the point farthest from its
    // centroid (smallest index on ties), one cluster at a time.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      std::size_t steal = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto owner = static_cast<std::size_t>(res.assignment[i]);
        if (counts[owner] <= 1) continue;
        const double d2 = squared_distance(points.row(i), res.centroids.row(owner));
        if (d2 > worst) {
          worst = d2;
          steal = i;
        }
      }
      if (worst < 0.0) continue;  // nothing stealable
      const auto owner = static_cast<std::size_t>(res.assignment[steal]);
      --counts[owner];
      ++counts[c];
      res.assignment[steal] = static_cast<int>(c);
      auto from = sums.row(owner);
      auto to = sums.row(c);
      const auto src = points.row(steal);
      for (std::size_t j = 0; j < d; ++j) {
        from[j] -= src[j];
        to[j] += src[j];
      }
    }

    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto row = res.centroids.row(c);
      double shift2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double updated = sums(c, j) / static_cast<double>(counts[c]);
        const double delta = updated - row[j];
        shift2 += delta * delta;
        row[j] = updated;
      }
      max_shift = std::max(max_shift, std::sqrt(shift2));
    }
    if (max_shift < cfg.tol) break;
  }

  assign_points(points, res.centroids, res.assignment);
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res.inertia +=
        squared_distance(points.row(i), res.centroids.row(static_cast<std::size_t>(res.assignment[i])));
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg) {
  if (cfg.k < 1) throw data_error("kmeans: k must be >= 1");
  if (static_cast<std::size_t>(cfg.k) > points.rows())
    throw data_error("kmeans: k (" + std::to_string(cfg.k) + ") exceeds point count (" +
                     std::to_string(points.rows()) + ")");
  if (cfg.restarts < 1) throw data_error("kmeans: restarts must be >= 1");
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw numeric_error("kmeans: non-finite point component");
  }

  std::vector<KMeansResult> runs(static_cast<std::size_t>(cfg.restarts));
  // Restarts are independent; the winner is (inertia, restart index).
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(cfg.restarts); ++r) {
    runs[static_cast<std::size_t>(r)] =
        lloyd_run(points, cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return runs[best];
}

const ClusterQuality& KSweepResult::at_k(int k) const {
  for (const ClusterQuality& q : per_k) {
    if (q.k == k) return q;
  }
  throw data_error("k_sweep: no entry for K=" + std::to_string(k));
}

const std::vector<int>& KSweepResult::assignment_at_k(int k) const {
  for (std::size_t i = 0; i < per_k.size(); ++i) {
    if (per_k[i].k == k) return assignments[i];
  }
  throw data_error("k_sweep: no entry for K=" + std::to_string(k));
}

KSweepResult k_sweep(const Matrix& points, std::span<const int> truth, std::uint64_t seed,
                     int k_min, int k_max, int restarts) {
  const std::size_t n = points.rows();
  if (n < 3) throw data_error("k_sweep: needs >= 3 points");
  if (truth.size() != n) throw data_error("k_sweep: truth length mismatch");
  k_max = std::min<int>(k_max, static_cast<int>(n));

  KSweepResult out;
  for (int k = k_min; k <= k_max; ++k) {
    KMeansConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.restarts = restarts;
    KMeansResult res = kmeans(points, cfg);
    ClusterQuality q;
    q.k = k;
    q.silhouette = silhouette(points, res.assignment);
    q.purity = purity(std::span<const int>(res.assignment), truth);
    out.per_k.push_back(q);
    out.assignments.push_back(std::move(res.assignment));
  }
  out.k_hat = out.per_k.front().k;
  double best = out.per_k.front().silhouette;
  for (const ClusterQuality& q : out.per_k) {
    if (q.silhouette > best) {
      best = q.silhouette;
      out.k_hat = q.k;
    }
  }
  return out;
}

}  // namespace moral
