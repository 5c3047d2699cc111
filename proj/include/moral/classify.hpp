#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moral/matrix.hpp"
#include "moral/metrics.hpp"
#include "moral/taxonomy.hpp"

namespace moral {

// Multi-label linear probe over frozen moral embeddings: one logit per
// label, sigmoid + binary cross-entropy.
struct LinearHead {
  Matrix w;  // num_labels x embed_dim
  std::vector<double> b;

  std::size_t num_labels() const { return w.rows(); }
  std::size_t embed_dim() const { return w.cols(); }

  static LinearHead init(std::size_t num_labels, std::size_t embed_dim, std::uint64_t seed);
};

struct CVConfig {
  int folds = 5;
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 0.01;
  double dropout = 0.1;  // input dropout during training only
  double threshold = 0.5;
  std::uint64_t seed = 42;
};

// Adam on mean BCE over seeded shuffled batches; input dropout at
// cfg.dropout while training. Deterministic in (inputs, seed).
LinearHead train_head(const Matrix& embeddings, const std::vector<LabelSet>& labels,
                      const CVConfig& cfg);

// Labels whose sigmoid(logit) exceeds the threshold; the empty set (no
// prediction) is allowed.
LabelSet predict(const LinearHead& head, std::span<const double> embedding, double threshold,
                 LabelScheme scheme);

struct CVReport {
  double micro_mean = 0.0, micro_std = 0.0;
  double macro_mean = 0.0, macro_std = 0.0;
  // label, mean F1, std F1 over folds, in canonical order
  std::vector<std::tuple<Label, double, double>> per_label;
  ErrorBreakdown errors;  // pooled over all held-out predictions
  std::vector<std::vector<std::size_t>> folds;
};

// Seeded shuffled fold partition with sizes differing by at most one; each
// fold is evaluated by a head trained on the others. Standard deviations
// are population-style (divide by fold count).
CVReport cross_validate(const Matrix& embeddings, const std::vector<LabelSet>& labels,
                        const CVConfig& cfg);

}  // namespace moral
