#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tabtext/embedding.hpp"
#include "tabtext/embedding_cache.hpp"

namespace tabtext {

// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize_alnum(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Deterministic bag-of-tokens feature hashing. Each token adds +-1 to one
// of `dim` buckets (bucket and sign from two independent hashes); the sum
// is L2-normalised, and a text with no tokens stays the zero vector.
class HashingBackend final : public EmbeddingBackend {
 public:
  explicit HashingBackend(std::size_t dim = kDefaultEmbeddingDim,
                          std::size_t max_chars = kDefaultMaxChars);

  std::string id() const override;
  std::size_t max_in_flight() const override { return 8; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override;

  Embedding embed_one(std::string_view text) const;
};

// POSTs {"texts": [...]} as JSON and expects {"embeddings": [[...]], "dim": D}.
// A non-200 status, malformed body, count mismatch or dim mismatch is a
// BackendError.
class RemoteBackend final : public EmbeddingBackend {
 public:
  RemoteBackend(std::string url, std::size_t dim, std::size_t max_chars = kDefaultMaxChars,
                std::size_t max_in_flight = 4, int timeout_seconds = 60);

  std::string id() const override;
  std::size_t max_in_flight() const override { return max_in_flight_; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override;

 private:
  std::string url_;
  std::string host_;
  int port_ = 80;
  std::string path_;
  std::size_t max_in_flight_;
  int timeout_seconds_;
};

// Static token-embedding sentence encoder loaded from a model directory:
//   config.json     {"dim": D, "lowercase": true, "normalize": true}
//   vocab.txt       one token per line; line i is row i of the matrix
//   embeddings.f32  |vocab| x D little-endian float32, row-major
// Texts are tokenized like tokenize_alnum (case kept when lowercase=false),
// unknown tokens are skipped, and the known token vectors are mean-pooled.
class LocalModelBackend final : public EmbeddingBackend {
 public:
  explicit LocalModelBackend(const std::filesystem::path& model_dir,
                             std::size_t max_chars = kDefaultMaxChars);

  std::string id() const override { return id_; }
  std::size_t max_in_flight() const override { return 8; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override;

 private:
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<float> matrix_;
  bool lowercase_ = true;
  bool normalize_ = true;
  std::string id_;
};

// Memoises another backend in memory and, optionally, in an EmbeddingCache.
// Results are exactly those of the wrapped backend.
class CachingBackend final : public EmbeddingBackend {
 public:
  CachingBackend(std::shared_ptr<EmbeddingBackend> inner,
                 std::shared_ptr<EmbeddingCache> disk_cache = nullptr);

  std::string id() const override { return inner_->id(); }
  std::size_t max_in_flight() const override { return inner_->max_in_flight(); }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override;

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  std::shared_ptr<EmbeddingBackend> inner_;
  std::shared_ptr<EmbeddingCache> disk_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Embedding> memory_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

struct BackendSettings {
  std::string backend = "hashing";  // hashing | remote | local
  std::size_t dim = kDefaultEmbeddingDim;
  std::size_t max_chars = kDefaultMaxChars;
  std::string cache;      // empty: no disk cache
  std::string url;        // remote
  std::string model_dir;  // local
  std::size_t batch_size = 64;
};

// Builds the selected backend wrapped in a CachingBackend.
std::shared_ptr<CachingBackend> make_backend(const BackendSettings& settings);

}  // namespace tabtext
