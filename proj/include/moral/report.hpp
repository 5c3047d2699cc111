#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "moral/embedstore.hpp"
#include "moral/metrics.hpp"
#include "moral/taxonomy.hpp"

namespace moral {

struct Projection2D {
  std::vector<std::pair<std::string, std::array<double, 2>>> points;  // sorted by id
  std::array<double, 2> explained_variance{0.0, 0.0};                 // non-increasing fractions
};

// Mean-centered projection onto the top two principal axes, found by power
// iteration with deflation (tol 1e-9, max 1000 iterations). Each axis is
// flipped so its largest-magnitude loading is positive. Needs >= 3 vectors
// of dimension >= 2; errors when all points coincide.
Projection2D pca2d(const EmbeddingStore& store);

// Self-contained SVG heatmap (sequential light-to-dark blue ramp, dark =
// high) plus a sibling .csv with the raw numbers.
void emit_heatmap(const MoralSimilarityMatrix& matrix, const std::filesystem::path& svg_path);

// SVG scatter with one fixed color per label plus a sibling .csv
// (id,x,y,label). Points without a label entry are drawn in gray.
void emit_scatter(const Projection2D& projection, const std::map<std::string, Label>& labels,
                  const std::filesystem::path& svg_path);

// JSON with sorted keys.
void emit_metrics(const nlohmann::json& bundle, const std::filesystem::path& path);

}  // namespace moral
