#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "moral/matrix.hpp"

namespace moral {

// Fixed-dimension dense vectors keyed by document id or lexicon word.
// Vectors are stored as float32 (the provider's precision) and promoted to
// double inside kernels; they are kept unnormalized, cosine normalizes on
// the fly. Keys iterate in sorted order, which fixes all file output.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }

  // Errors on dimension mismatch, non-finite components, or duplicate id.
  void insert(const std::string& id, std::vector<float> vec);
  bool contains(const std::string& id) const { return vectors_.count(id) > 0; }
  std::span<const float> at(const std::string& id) const;

  const std::map<std::string, std::vector<float>>& vectors() const { return vectors_; }
  std::vector<std::string> ids() const;

  // Rows in the given id order, promoted to double. Errors on a missing id.
  Matrix align(std::span<const std::string> ids) const;

  bool operator==(const EmbeddingStore&) const = default;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<float>> vectors_;
};

// Text format: header line `#dim=D`, then rows `id<TAB>c1,c2,...,cD` with
// decimal floats. Round-trips float32 components exactly.
EmbeddingStore load_embeddings_text(const std::filesystem::path& path);
void save_embeddings_text(const EmbeddingStore& store, const std::filesystem::path& path);

// Binary format: magic "MEMB", little-endian u32 dim, u32 count, then per
// record u32 id byte length, the UTF-8 id, and dim float32 components.
EmbeddingStore load_embeddings_binary(const std::filesystem::path& path);
void save_embeddings_binary(const EmbeddingStore& store, const std::filesystem::path& path);

// Dispatch on content: binary when the file starts with the MEMB magic.
EmbeddingStore load_embeddings(const std::filesystem::path& path);

}  // namespace moral
