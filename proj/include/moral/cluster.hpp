#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moral/matrix.hpp"
#include "moral/taxonomy.hpp"

namespace moral {

struct KMeansConfig {
  int k = 2;
  std::uint64_t seed = 42;
  int max_iters = 300;
  double tol = 1e-6;  // max centroid shift
  int restarts = 10;
};

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// Euclidean K-means: k-means++ seeded init, Lloyd iterations until the max
// centroid shift drops below tol, empty clusters repaired by stealing the
// point farthest from its centroid, best of `restarts` runs by (inertia,
// restart index). Deterministic in (points, cfg). Errors when k > n.
KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg);

struct ClusterQuality {
  int k = 0;
  double silhouette = 0.0;
  double purity = 0.0;
};

struct KSweepResult {
  std::vector<ClusterQuality> per_k;
  std::vector<std::vector<int>> assignments;  // parallel to per_k
  int k_hat = 0;

  const ClusterQuality& at_k(int k) const;
  const std::vector<int>& assignment_at_k(int k) const;
};

// kmeans + silhouette + purity for each K in [k_min, min(k_max, n)];
// k_hat is the argmax-silhouette K with ties to the smaller K. Needs >= 3
// points. The sweep always includes K = 10 when the range covers it, the
// element count of the taxonomy.
KSweepResult k_sweep(const Matrix& points, std::span<const int> truth, std::uint64_t seed,
                     int k_min = 2, int k_max = 15, int restarts = 10);

}  // namespace moral
