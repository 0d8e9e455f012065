#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabtext/serializer.hpp"

namespace tabtext {

inline constexpr std::size_t kDefaultEmbeddingDim = 768;
inline constexpr std::size_t kDefaultMaxChars = 510;

struct Embedding {
  std::vector<double> values;

  Embedding() = default;
  explicit Embedding(std::vector<double> v) : values(std::move(v)) {}
  static Embedding zeros(std::size_t dim) { return Embedding(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const noexcept { return values.size(); }
  bool all_finite() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

// Capability contract for anything that maps texts to fixed-size vectors.
// embed_batch must be deterministic and return one embedding per input, in order.
class EmbeddingBackend {
 public:
  EmbeddingBackend(std::size_t dim, std::size_t max_chars);
  virtual ~EmbeddingBackend() = default;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t max_chars() const noexcept { return max_chars_; }

  // Identifies the backend configuration; part of every cache key.
  virtual std::string id() const = 0;

  // Upper bound on concurrently issued batches.
  virtual std::size_t max_in_flight() const { return 1; }

  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) = 0;

 private:
  std::size_t dim_;
  std::size_t max_chars_;
};

// Greedy whitespace chunking; lengths in code points. Tokens longer than
// max_chars are hard-split. Blank text yields no chunks.
std::vector<std::string> chunk_text(std::string_view text, std::size_t max_chars);

// Whole text when it fits, else the equal-weight mean of its chunk embeddings.
// Blank text maps to the zero vector.
Embedding embed_text(std::string_view text, EmbeddingBackend& backend);

struct EmbedOptions {
  std::size_t batch_size = 64;
  std::size_t workers = 1;
};

// Batched form of embed_text; results are identical to per-text calls.
// Duplicate texts and chunks are embedded once. Backend failures are
// rethrown as BackendError carrying the first offending text index.
std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                   const EmbedOptions& options = {});

// SeparateEmbeddings concatenates per-source embeddings (K * D);
// SingleParagraph embeds the merged paragraph (D).
Embedding embed_entity_sources(const std::vector<std::string>& per_source_texts, CombineMode mode,
                               EmbeddingBackend& backend);

Embedding concatenate(std::span<const Embedding> parts);

}  // namespace tabtext
