#include "tabtext/embedding_cache.hpp"

#include <bit>
#include <cstring>

#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

namespace {

static_assert(std::endian::native == std::endian::little,
              "embedding cache records are stored little-endian");

constexpr std::string_view kMagic = "TTEMBC01";

template <typename T>
void append_pod(std::string& out, const T& value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
bool read_pod(std::string_view data, std::size_t& offset, T& value) {
  if (data.size() - offset < sizeof(T)) return false;
  std::memcpy(&value, data.data() + offset, sizeof(T));
  offset += sizeof(T);
  return true;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (!std::filesystem::exists(path_)) write_file(path_.string(), kMagic);
  load();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open embedding cache '" + path_.string() + "' for appending");
}

std::string EmbeddingCache::make_key(std::string_view backend_id, const Sha256& text_hash) {
  std::string key(backend_id);
  key.push_back('\0');
  key.append(reinterpret_cast<const char*>(text_hash.data()), text_hash.size());
  return key;
}

void EmbeddingCache::load() {
  const std::string data = read_file(path_.string());
  if (!std::string_view(data).starts_with(kMagic)) {
    throw Error("'" + path_.string() + "' is not an embedding cache file");
  }
  std::size_t offset = kMagic.size();
  std::size_t good = offset;
  while (offset < data.size()) {
    std::uint32_t id_len = 0;
    if (!read_pod(data, offset, id_len) || data.size() - offset < id_len) break;
    std::string_view backend_id(data.data() + offset, id_len);
    offset += id_len;
    Sha256 hash{};
    if (data.size() - offset < hash.size()) break;
    std::memcpy(hash.data(), data.data() + offset, hash.size());
    offset += hash.size();
    std::uint32_t dim = 0;
    if (!read_pod(data, offset, dim)) break;
    if ((data.size() - offset) / sizeof(double) < dim) break;
    std::vector<double> values(dim);
    std::memcpy(values.data(), data.data() + offset, dim * sizeof(double));
    offset += dim * sizeof(double);
    entries_.insert_or_assign(make_key(backend_id, hash), Embedding(std::move(values)));
    good = offset;
  }
  if (good != data.size()) std::filesystem::resize_file(path_, good);
}

std::optional<Embedding> EmbeddingCache::get(std::string_view backend_id,
                                             std::string_view text) const {
  const auto key = make_key(backend_id, sha256(text));
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(std::string_view backend_id, std::string_view text,
                         const Embedding& embedding) {
  const auto hash = sha256(text);
  auto key = make_key(backend_id, hash);
  std::unique_lock lock(mutex_);
  if (entries_.contains(key)) return;

  std::string record;
  append_pod(record, static_cast<std::uint32_t>(backend_id.size()));
  record.append(backend_id);
  record.append(reinterpret_cast<const char*>(hash.data()), hash.size());
  append_pod(record, static_cast<std::uint32_t>(embedding.dim()));
  record.append(reinterpret_cast<const char*>(embedding.values.data()),
                embedding.dim() * sizeof(double));
  out_.write(record.data(), static_cast<std::streamsize>(record.size()));
  out_.flush();
  if (!out_) throw Error("write to embedding cache '" + path_.string() + "' failed");
  entries_.emplace(std::move(key), embedding);
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace tabtext
