#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "moral/error.hpp"
#include "moral/metrics.hpp"
#include "moral/report.hpp"
#include "moral/rng.hpp"
#include "support.hpp"

using namespace moral;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EmbeddingStore line_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> direction(dim);
  for (double& v : direction) v = rng.normal();
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.normal();
    std::vector<float> v(dim);
    for (std::size_t c = 0; c < dim; ++c) v[c] = static_cast<float>(t * direction[c]);
    store.insert("p" + std::to_string(i), std::move(v));
  }
  return store;
}

}  // namespace

TEST_CASE("pca2d on collinear data explains everything on the first axis") {
  const EmbeddingStore store = line_store(20, 10, 3);
  const Projection2D proj = pca2d(store);
  CHECK(proj.explained_variance[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(proj.explained_variance[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(proj.explained_variance[0] >= proj.explained_variance[1]);
  CHECK(proj.points.size() == 20);
}

TEST_CASE("pca2d on 2-D input preserves pairwise distances") {
  Rng rng(4);
  EmbeddingStore store(2);
  for (int i = 0; i < 30; ++i)
    store.insert("p" + std::to_string(i),
                 {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())});
  const Projection2D proj = pca2d(store);

  const auto ids = store.ids();
  for (std::size_t i = 0; i < ids.size(); i += 7) {
    for (std::size_t j = i + 1; j < ids.size(); j += 5) {
      const auto a = store.at(ids[i]);
      const auto b = store.at(ids[j]);
      const double dx0 = static_cast<double>(a[0]) - b[0];
      const double dy0 = static_cast<double>(a[1]) - b[1];
      const auto& pa = proj.points[i].second;
      const auto& pb = proj.points[j].second;
      const double dx1 = pa[0] - pb[0];
      const double dy1 = pa[1] - pb[1];
      CHECK(std::sqrt(dx0 * dx0 + dy0 * dy0) ==
            doctest::Approx(std::sqrt(dx1 * dx1 + dy1 * dy1)).epsilon(1e-6));
    }
  }
}

TEST_CASE("pca2d determinism and translation invariance") {
  const EmbeddingStore store = line_store(15, 6, 9);
  const Projection2D a = pca2d(store);
  const Projection2D b = pca2d(store);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].second[0] == b.points[i].second[0]);
    CHECK(a.points[i].second[1] == b.points[i].second[1]);
  }

  EmbeddingStore shifted(6);
  for (const auto& [id, v] : store.vectors()) {
    std::vector<float> w(v);
    for (std::size_t c = 0; c < w.size(); ++c) w[c] += 100.0f;
    shifted.insert(id, std::move(w));
  }
  const Projection2D c = pca2d(shifted);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(c.points[i].second[0] == doctest::Approx(a.points[i].second[0]).epsilon(1e-3));
  }
}

TEST_CASE("pca2d input validation") {
  EmbeddingStore two(4);
  two.insert("a", {1, 2, 3, 4});
  two.insert("b", {4, 3, 2, 1});
  CHECK_THROWS_AS(pca2d(two), data_error);

  EmbeddingStore identical(3);
  for (int i = 0; i < 5; ++i) identical.insert("p" + std::to_string(i), {1.0f, 2.0f, 3.0f});
  CHECK_THROWS_WITH_AS(pca2d(identical), doctest::Contains("identical"), data_error);
}

TEST_CASE("emit_heatmap produces well-formed svg and a parse-back csv") {
  EmbeddingStore store(3);
  Rng rng(12);
  std::vector<std::pair<Label, std::vector<std::string>>> groups;
  for (int g = 0; g < 2; ++g) {
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) {
      const std::string id = "h" + std::to_string(g) + std::to_string(i);
      store.insert(id, {static_cast<float>(rng.normal()), static_cast<float>(rng.normal()),
                        static_cast<float>(rng.normal())});
      ids.push_back(id);
    }
    groups.emplace_back(Label(LabelScheme::Elements11, static_cast<std::uint8_t>(g)), ids);
  }
  const auto m = moral_similarity(store, groups);
  const auto svg_path = std::filesystem::temp_directory_path() / "heatmap_test.svg";
  emit_heatmap(m, svg_path);

  const std::string svg = slurp(svg_path);
  CHECK(testsupport::xml_well_formed(svg));
  // 2x2 matrix -> 4 cells
  std::size_t rects = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  CHECK(rects == 4);

  const auto csv_path = std::filesystem::path(svg_path).replace_extension(".csv");
  const auto back = load_similarity_csv(csv_path);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(back.values(r, c) == m.values(r, c));

  std::filesystem::remove(svg_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("emit_scatter writes svg + csv, rejects empty input") {
  const EmbeddingStore store = line_store(12, 4, 21);
  const Projection2D proj = pca2d(store);
  std::map<std::string, Label> labels;
  int i = 0;
  for (const auto& [id, xy] : proj.points)
    labels.emplace(id, Label(LabelScheme::Elements11, static_cast<std::uint8_t>(i++ % 11)));

  const auto svg_path = std::filesystem::temp_directory_path() / "scatter_test.svg";
  emit_scatter(proj, labels, svg_path);
  CHECK(testsupport::xml_well_formed(slurp(svg_path)));

  const auto csv_path = std::filesystem::path(svg_path).replace_extension(".csv");
  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("id,x,y,label") == 0);
  std::size_t rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 12);

  const Projection2D empty;
  CHECK_THROWS_AS(emit_scatter(empty, labels, svg_path), data_error);

  std::filesystem::remove(svg_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("emit_metrics writes sorted-key json") {
  nlohmann::json bundle;
  bundle["zeta"] = 1;
  bundle["alpha"] = 2;
  bundle["mid"] = nlohmann::json{{"b", 1}, {"a", 2}};
  const auto path = std::filesystem::temp_directory_path() / "metrics_test.json";
  emit_metrics(bundle, path);
  const std::string text = slurp(path);
  CHECK(text.find("\"alpha\"") < text.find("\"mid\""));
  CHECK(text.find("\"mid\"") < text.find("\"zeta\""));
  const auto parsed = nlohmann::json::parse(text);
  CHECK(parsed["zeta"] == 1);
  std::filesystem::remove(path);
}
