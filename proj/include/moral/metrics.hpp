#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "moral/embedstore.hpp"
#include "moral/matrix.hpp"
#include "moral/taxonomy.hpp"

namespace moral {

// u.v / (|u||v|); errors on a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

// Square table of mean pairwise cosine similarities between label groups,
// on the x100 percent scale, labels in canonical order.
struct MoralSimilarityMatrix {
  std::vector<Label> labels;
  Matrix values;
};

// Off-diagonal (m,n): mean cosine over cross pairs with identical-id pairs
// skipped (a multi-label item may sit in both groups). Diagonal (m,m): mean
// over unordered distinct pairs, so groups on the diagonal need >= 2
// members. Empty groups error.
MoralSimilarityMatrix moral_similarity(
    const EmbeddingStore& store,
    const std::vector<std::pair<Label, std::vector<std::string>>>& groups);

void write_similarity_csv(const MoralSimilarityMatrix& m, const std::filesystem::path& path);
MoralSimilarityMatrix load_similarity_csv(const std::filesystem::path& path);

// Mean ||x - y||^alpha over positive pairs, inputs unit-normalized first.
double alignment(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                 double alpha = 2.0);

// log mean over unordered distinct pairs of exp(-t d^2), unit-normalized
// inputs; needs >= 2 vectors.
double uniformity(const std::vector<std::vector<double>>& vectors, double t = 2.0);

// Mean over samples of (b - a)/max(a, b) with Euclidean distances;
// singleton-cluster samples score 0. Needs >= 2 non-empty clusters.
double silhouette(const Matrix& points, std::span<const int> assignment);

// Fraction of items whose true label matches their cluster's most frequent
// true label. Inputs are parallel arrays.
double purity(std::span<const int> assignment, std::span<const int> truth);

// id-keyed variant; errors when the two maps do not cover the same ids.
double purity(const std::map<std::string, int>& assignment,
              const std::map<std::string, int>& truth);

struct F1Report {
  double micro = 0.0;
  double macro = 0.0;
  std::vector<std::pair<Label, double>> per_label;  // canonical order, all scheme labels
};

// Multi-label precision/recall/F1 over binary indicators; micro pools
// TP/FP/FN across labels, macro averages per-label F1 with the F1=0
// zero-division convention.
F1Report f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

// Misclassification taxonomy over items where gold != pred, assigned by
// precedence: (I) moral gold predicted as non-moral or nothing, (II)
// non-moral gold predicted moral, (IV) some predicted label is the opposite
// virtue/vice of a gold label, (III) anything else. Percentages over the
// misclassified count; all zero (flagged by misclassified == 0) when every
// item matches.
struct ErrorBreakdown {
  double error_i = 0.0;
  double error_ii = 0.0;
  double error_iii = 0.0;
  double error_iv = 0.0;
  std::size_t misclassified = 0;
  std::size_t total = 0;
};

ErrorBreakdown error_taxonomy(const std::vector<LabelSet>& gold,
                              const std::vector<LabelSet>& pred);

}  // namespace moral
