#pragma once

#include "moral/cluster.hpp"
#include "moral/embedstore.hpp"
#include "moral/matrix.hpp"
#include "moral/metrics.hpp"

// Single-threaded reference implementations of the evaluation kernels,
// written as direct transcriptions of their definitions. They back the
// test-suite oracles and the kernel benchmark; keep them naive on purpose
// and do not share kernel code with the parallel versions.
namespace moral::serial {

double cosine(std::span<const double> u, std::span<const double> v);

MoralSimilarityMatrix moral_similarity(
    const EmbeddingStore& store,
    const std::vector<std::pair<Label, std::vector<std::string>>>& groups);

double alignment(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                 double alpha = 2.0);

double uniformity(const std::vector<std::vector<double>>& vectors, double t = 2.0);

double silhouette(const Matrix& points, std::span<const int> assignment);

double purity(std::span<const int> assignment, std::span<const int> truth);

F1Report f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg);

}  // namespace moral::serial
