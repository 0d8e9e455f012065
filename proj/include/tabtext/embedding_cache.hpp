#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "tabtext/digest.hpp"
#include "tabtext/embedding.hpp"

namespace tabtext {

// On-disk key -> vector store keyed by (backend id, SHA-256 of the text).
//
// The file is an append-only log of records behind a short magic header.
// A torn trailing record (interrupted write) is dropped and truncated away
// on open, so a rerun resumes from the last complete insertion. Lookups take
// a shared lock; insertions take an exclusive lock and append one record.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path path);

  std::optional<Embedding> get(std::string_view backend_id, std::string_view text) const;
  void put(std::string_view backend_id, std::string_view text, const Embedding& embedding);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  static std::string make_key(std::string_view backend_id, const Sha256& text_hash);
  void load();

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Embedding> entries_;
  std::ofstream out_;
};

}  // namespace tabtext
