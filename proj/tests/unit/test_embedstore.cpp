#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "moral/embedstore.hpp"
#include "moral/error.hpp"
#include "moral/rng.hpp"

using namespace moral;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

EmbeddingStore random_store(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<float> v(dim);
    for (float& x : v) x = static_cast<float>(rng.normal());
    store.insert("id" + std::to_string(i), std::move(v));
  }
  return store;
}

}  // namespace

TEST_CASE("text format parses the documented shape") {
  const auto path = temp_file("emb_basic.tsv");
  {
    std::ofstream out(path);
    out << "#dim=2\n";
    out << "a\t1,0\n";
  }
  const EmbeddingStore store = load_embeddings_text(path);
  CHECK(store.dim() == 2);
  REQUIRE(store.contains("a"));
  CHECK(store.at("a")[0] == 1.0f);
  CHECK(store.at("a")[1] == 0.0f);
  std::filesystem::remove(path);
}

TEST_CASE("row arity mismatch errors with the row id") {
  const auto path = temp_file("emb_bad.tsv");
  {
    std::ofstream out(path);
    out << "#dim=2\n";
    out << "a\t1,2,3\n";
  }
  CHECK_THROWS_WITH_AS(load_embeddings_text(path), doctest::Contains("'a'"), data_error);
  std::filesystem::remove(path);
}

TEST_CASE("duplicate id errors") {
  const auto path = temp_file("emb_dup.tsv");
  {
    std::ofstream out(path);
    out << "#dim=1\n";
    out << "a\t1\n";
    out << "a\t2\n";
  }
  CHECK_THROWS_WITH_AS(load_embeddings_text(path), doctest::Contains("duplicate"), data_error);
  std::filesystem::remove(path);
}

TEST_CASE("text round trip is exact for float32 payloads") {
  const EmbeddingStore store = random_store(100, 7, 42);
  const auto path = temp_file("emb_roundtrip.tsv");
  save_embeddings_text(store, path);
  const EmbeddingStore back = load_embeddings_text(path);
  CHECK(back == store);
  std::filesystem::remove(path);
}

TEST_CASE("binary round trip is exact, format auto-detected") {
  const EmbeddingStore store = random_store(50, 5, 9);
  const auto path = temp_file("emb_roundtrip.memb");
  save_embeddings_binary(store, path);
  const EmbeddingStore back = load_embeddings(path);
  CHECK(back == store);
  std::filesystem::remove(path);
}

TEST_CASE("align orders rows and errors on missing ids") {
  EmbeddingStore store(1);
  store.insert("a", {1.0f});
  store.insert("b", {2.0f});
  const std::vector<std::string> ids = {"b", "a"};
  const Matrix m = store.align(ids);
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 2.0);
  CHECK(m(1, 0) == 1.0);

  const std::vector<std::string> empty_ids;
  CHECK(store.align(empty_ids).rows() == 0);

  const std::vector<std::string> missing = {"z"};
  CHECK_THROWS_WITH_AS(store.align(missing), doctest::Contains("missing embedding: z"), data_error);
}

TEST_CASE("insert validates dimension and finiteness") {
  EmbeddingStore store(2);
  store.insert("ok", {1.0f, 2.0f});
  CHECK_THROWS_AS(store.insert("bad", {1.0f}), data_error);
  CHECK_THROWS_AS(store.insert("nan", {1.0f, std::numeric_limits<float>::quiet_NaN()}), data_error);
  CHECK_THROWS_AS(store.insert("ok", {3.0f, 4.0f}), data_error);
}
