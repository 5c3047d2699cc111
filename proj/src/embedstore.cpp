#include "moral/embedstore.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "moral/detail/binio.hpp"
#include "moral/error.hpp"

namespace moral {

namespace {

using detail::read_f32;
using detail::read_u32;
using detail::write_f32;
using detail::write_u32;

constexpr char kMagic[4] = {'M', 'E', 'M', 'B'};
constexpr char kWhat[] = "embedding file";

}  // namespace

void EmbeddingStore::insert(const std::string& id, std::vector<float> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw data_error("embedding '" + id + "' has " + std::to_string(vec.size()) +
                     " components, expected " + std::to_string(dim_));
  }
  for (float v : vec) {
    if (!std::isfinite(v)) throw data_error("non-finite component in embedding '" + id + "'");
  }
  if (!vectors_.emplace(id, std::move(vec)).second)
    throw data_error("duplicate embedding id '" + id + "'");
}

std::span<const float> EmbeddingStore::at(const std::string& id) const {
  const auto it = vectors_.find(id);
  if (it == vectors_.end()) throw data_error("missing embedding: " + id);
  return it->second;
}

std::vector<std::string> EmbeddingStore::ids() const {
  std::vector<std::string> out;
  out.reserve(vectors_.size());
  for (const auto& [id, _] : vectors_) out.push_back(id);
  return out;
}

Matrix EmbeddingStore::align(std::span<const std::string> ids) const {
  Matrix m(ids.size(), dim_);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto vec = at(ids[r]);
    auto row = m.row(r);
    for (std::size_t c = 0; c < dim_; ++c) row[c] = static_cast<double>(vec[c]);
  }
  return m;
}

EmbeddingStore load_embeddings_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open embedding file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.rfind("#dim=", 0) != 0)
    throw data_error(path.string() + ": expected `#dim=D` header");
  std::size_t dim = 0;
  {
    const auto* first = line.data() + 5;
    const auto* last = line.data() + line.size();
    const auto res = std::from_chars(first, last, dim);
    if (res.ec != std::errc{} || res.ptr != last || dim == 0)
      throw data_error(path.string() + ": invalid dimension in header");
  }

  EmbeddingStore store(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw data_error(path.string() + " line " + std::to_string(line_no) +
                       ": expected `id<TAB>components`");
    const std::string id = line.substr(0, tab);
    std::vector<float> vec;
    vec.reserve(dim);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      float v = 0.0f;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{})
        throw data_error(path.string() + " line " + std::to_string(line_no) +
                         ": bad float component (row id '" + id + "')");
      vec.push_back(v);
      p = res.ptr;
      if (p < end) {
        if (*p != ',')
          throw data_error(path.string() + " line " + std::to_string(line_no) +
                           ": expected ',' between components (row id '" + id + "')");
        ++p;
      }
    }
    if (vec.size() != dim)
      throw data_error(path.string() + " line " + std::to_string(line_no) + ": row '" + id +
                       "' has " + std::to_string(vec.size()) + " components, header says " +
                       std::to_string(dim));
    store.insert(id, std::move(vec));
  }
  return store;
}

void save_embeddings_text(const EmbeddingStore& store, const std::filesystem::path& path) {
  if (store.empty()) throw data_error("refusing to save empty embedding store");
  std::ofstream out(path);
  if (!out) throw data_error("cannot write embedding file: " + path.string());
  out << "#dim=" << store.dim() << "\n";
  char buf[64];
  for (const auto& [id, vec] : store.vectors()) {
    out << id << '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      // max_digits10 for float: exact text round trip.
      const int n = std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(vec[i]));
      out.write(buf, n);
      if (i + 1 < vec.size()) out << ',';
    }
    out << '\n';
  }
}

EmbeddingStore load_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open embedding file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error(path.string() + ": missing MEMB magic");
  const std::uint32_t dim = read_u32(in, kWhat);
  const std::uint32_t count = read_u32(in, kWhat);
  if (dim == 0) throw data_error(path.string() + ": zero dimension");

  EmbeddingStore store(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t id_len = read_u32(in, kWhat);
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    if (!in) throw data_error(path.string() + ": truncated record " + std::to_string(r));
    std::vector<float> vec(dim);
    for (std::uint32_t c = 0; c < dim; ++c) vec[c] = read_f32(in, kWhat);
    store.insert(id, std::move(vec));
  }
  return store;
}

void save_embeddings_binary(const EmbeddingStore& store, const std::filesystem::path& path) {
  if (store.empty()) throw data_error("refusing to save empty embedding store");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write embedding file: " + path.string());
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(store.dim()));
  write_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [id, vec] : store.vectors()) {
    write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float v : vec) write_f32(out, v);
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw data_error("cannot open embedding file: " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return load_embeddings_binary(path);
  return load_embeddings_text(path);
}

}  // namespace moral
