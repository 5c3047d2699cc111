// Benchmark: OpenMP kernels against their serial reference twins.
// Prints per-kernel timings, speedup, and the max deviation between the
// two routes (which must stay at rounding level).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "moral/cluster.hpp"
#include "moral/embedstore.hpp"
#include "moral/metrics.hpp"
#include "moral/rng.hpp"
#include "moral/serial.hpp"

using namespace moral;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Timing {
  double parallel_s = 0.0;
  double serial_s = 0.0;
  double max_dev = 0.0;
};

void print_row(const std::string& name, const Timing& t) {
  std::printf("%-22s %10.4fs %10.4fs %8.2fx %12.3e\n", name.c_str(), t.serial_s, t.parallel_s,
              t.serial_s / t.parallel_s, t.max_dev);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 2000;
  std::size_t dim = 128;
  if (argc > 1) n = static_cast<std::size_t>(std::stoul(argv[1]));
  if (argc > 2) dim = static_cast<std::size_t>(std::stoul(argv[2]));

#ifdef _OPENMP
  std::printf("threads: %d, n = %zu, dim = %zu\n", omp_get_max_threads(), n, dim);
#else
  std::printf("threads: 1 (OpenMP disabled), n = %zu, dim = %zu\n", n, dim);
#endif
  std::printf("%-22s %11s %11s %9s %12s\n", "kernel", "serial", "parallel", "speedup",
              "max |dev|");

  Rng rng(42);

  // --- pairwise group similarity --------------------------------------
  {
    EmbeddingStore store(dim);
    std::vector<std::pair<Label, std::vector<std::string>>> groups;
    const std::size_t per_group = n / 10;
    for (std::uint8_t g = 0; g < 10; ++g) {
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < per_group; ++i) {
        std::vector<float> v(dim);
        for (float& x : v) x = static_cast<float>(rng.normal());
        const std::string id = "g" + std::to_string(g) + "_" + std::to_string(i);
        store.insert(id, std::move(v));
        ids.push_back(id);
      }
      groups.emplace_back(Label(LabelScheme::Elements11, g), ids);
    }
    Timing t;
    double t0 = now_seconds();
    const auto fast = moral_similarity(store, groups);
    t.parallel_s = now_seconds() - t0;
    t0 = now_seconds();
    const auto slow = serial::moral_similarity(store, groups);
    t.serial_s = now_seconds() - t0;
    for (std::size_t r = 0; r < fast.values.rows(); ++r)
      for (std::size_t c = 0; c < fast.values.cols(); ++c)
        t.max_dev = std::max(t.max_dev, std::abs(fast.values(r, c) - slow.values(r, c)));
    print_row("moral_similarity", t);
  }

  // --- silhouette ------------------------------------------------------
  {
    Matrix points(n, dim);
    for (double& v : points.data()) v = rng.normal();
    std::vector<int> assignment(n);
    for (std::size_t i = 0; i < n; ++i) assignment[i] = static_cast<int>(rng.bounded(10));
    Timing t;
    double t0 = now_seconds();
    const double fast = silhouette(points, assignment);
    t.parallel_s = now_seconds() - t0;
    t0 = now_seconds();
    const double slow = serial::silhouette(points, assignment);
    t.serial_s = now_seconds() - t0;
    t.max_dev = std::abs(fast - slow);
    print_row("silhouette", t);
  }

  // --- uniformity -------------------------------------------------------
  {
    std::vector<std::vector<double>> vectors(n, std::vector<double>(dim));
    for (auto& v : vectors)
      for (double& x : v) x = rng.normal();
    Timing t;
    double t0 = now_seconds();
    const double fast = uniformity(vectors, 2.0);
    t.parallel_s = now_seconds() - t0;
    t0 = now_seconds();
    const double slow = serial::uniformity(vectors, 2.0);
    t.serial_s = now_seconds() - t0;
    t.max_dev = std::abs(fast - slow);
    print_row("uniformity", t);
  }

  // --- k-means ----------------------------------------------------------
  {
    Matrix points(n, 16);
    for (double& v : points.data()) v = rng.normal();
    KMeansConfig cfg;
    cfg.k = 10;
    cfg.restarts = 4;
    cfg.max_iters = 50;
    Timing t;
    double t0 = now_seconds();
    const auto fast = kmeans(points, cfg);
    t.parallel_s = now_seconds() - t0;
    t0 = now_seconds();
    const auto slow = serial::kmeans(points, cfg);
    t.serial_s = now_seconds() - t0;
    t.max_dev = std::abs(fast.inertia - slow.inertia);
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (fast.assignment[i] != slow.assignment[i]) ++mismatched;
    print_row("kmeans", t);
    if (mismatched > 0) std::printf("  kmeans assignment mismatches: %zu\n", mismatched);
  }

  return 0;
}
