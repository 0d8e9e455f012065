#include "tabtext/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

bool Embedding::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double Embedding::norm() const noexcept {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingBackend::EmbeddingBackend(std::size_t dim, std::size_t max_chars)
    : dim_(dim), max_chars_(max_chars) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
  if (max_chars == 0) throw ValidationError("max_chars must be positive");
}

std::vector<std::string> chunk_text(std::string_view text, std::size_t max_chars) {
  if (max_chars == 0) throw ValidationError("max_chars must be positive");
  std::vector<std::string> chunks;
  std::string current;
  std::size_t current_len = 0;

  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
    current_len = 0;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) break;
    std::string_view token = text.substr(start, i - start);
    std::size_t len = utf8_length(token);

    if (len > max_chars) {
      flush();
      while (len > max_chars) {
        const std::size_t cut = utf8_prefix_bytes(token, max_chars);
        chunks.emplace_back(token.substr(0, cut));
        token.remove_prefix(cut);
        len -= max_chars;
      }
      current.assign(token);
      current_len = len;
    } else if (current.empty()) {
      current.assign(token);
      current_len = len;
    } else if (current_len + 1 + len <= max_chars) {
      current += ' ';
      current.append(token);
      current_len += 1 + len;
    } else {
      flush();
      current.assign(token);
      current_len = len;
    }
  }
  flush();
  return chunks;
}

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) { return is_space(c); });
}

}  // namespace

std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                   const EmbedOptions& options) {
  const std::size_t dim = backend.dim();
  const std::size_t max_chars = backend.max_chars();

  // Pieces actually sent to the backend, deduplicated.
  std::vector<std::string> unique_pieces;
  std::vector<std::size_t> piece_owner;  // first text index using each piece
  std::unordered_map<std::string, std::size_t> piece_index;
  std::vector<std::vector<std::size_t>> text_pieces(texts.size());

  auto add_piece = [&](std::string piece, std::size_t owner) {
    const auto [it, inserted] = piece_index.try_emplace(piece, unique_pieces.size());
    if (inserted) {
      unique_pieces.push_back(std::move(piece));
      piece_owner.push_back(owner);
    }
    return it->second;
  };

  for (std::size_t t = 0; t < texts.size(); ++t) {
    const std::string& text = texts[t];
    if (is_blank(text)) continue;
    if (utf8_length(text) <= max_chars) {
      text_pieces[t].push_back(add_piece(text, t));
    } else {
      for (auto& chunk : chunk_text(text, max_chars)) {
        text_pieces[t].push_back(add_piece(std::move(chunk), t));
      }
    }
  }

  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n_batches = (unique_pieces.size() + batch_size - 1) / batch_size;
  std::vector<Embedding> piece_embeddings(unique_pieces.size());

  std::atomic<std::size_t> next_batch{0};
  std::mutex error_mutex;
  std::size_t error_batch = n_batches;
  std::exception_ptr error;

  auto run_batch = [&](std::size_t b) {
    const std::size_t begin = b * batch_size;
    const std::size_t end = std::min(unique_pieces.size(), begin + batch_size);
    std::span<const std::string> batch(unique_pieces.data() + begin, end - begin);
    std::vector<Embedding> out;
    try {
      out = backend.embed_batch(batch);
    } catch (const BackendError& e) {
      const std::size_t local = e.text_index();
      const std::size_t owner =
          local < batch.size() ? piece_owner[begin + local] : piece_owner[begin];
      throw BackendError(e.detail(), owner);
    } catch (const std::exception& e) {
      throw BackendError(std::string("embedding backend failed: ") + e.what(), piece_owner[begin]);
    }
    if (out.size() != batch.size()) {
      throw BackendError("backend returned " + std::to_string(out.size()) + " embeddings for " +
                             std::to_string(batch.size()) + " texts",
                         piece_owner[begin]);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k].dim() != dim) {
        throw BackendError("backend returned dimension " + std::to_string(out[k].dim()) +
                               ", expected " + std::to_string(dim),
                           piece_owner[begin + k]);
      }
      if (!out[k].all_finite()) {
        throw BackendError("backend returned a non-finite embedding", piece_owner[begin + k]);
      }
      piece_embeddings[begin + k] = std::move(out[k]);
    }
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next_batch.fetch_add(1);
      if (b >= n_batches) return;
      {
        std::lock_guard lock(error_mutex);
        if (error && error_batch < b) return;
      }
      try {
        run_batch(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (b < error_batch) {
          error_batch = b;
          error = std::current_exception();
        }
      }
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(std::min(options.workers, backend.max_in_flight()), 1,
                              std::max<std::size_t>(1, n_batches));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<Embedding> result;
  result.reserve(texts.size());
  for (std::size_t t = 0; t < texts.size(); ++t) {
    const auto& pieces = text_pieces[t];
    if (pieces.empty()) {
      result.push_back(Embedding::zeros(dim));
    } else if (pieces.size() == 1) {
      result.push_back(piece_embeddings[pieces.front()]);
    } else {
      Embedding mean = Embedding::zeros(dim);
      for (std::size_t p : pieces) {
        const auto& e = piece_embeddings[p].values;
        for (std::size_t d = 0; d < dim; ++d) mean.values[d] += e[d];
      }
      const double k = static_cast<double>(pieces.size());
      for (double& v : mean.values) v /= k;
      result.push_back(std::move(mean));
    }
  }
  return result;
}

Embedding embed_text(std::string_view text, EmbeddingBackend& backend) {
  const std::string owned(text);
  return embed_texts(std::span<const std::string>(&owned, 1), backend).front();
}

Embedding concatenate(std::span<const Embedding> parts) {
  std::vector<double> out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.dim();
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.values.begin(), p.values.end());
  return Embedding(std::move(out));
}

Embedding embed_entity_sources(const std::vector<std::string>& per_source_texts, CombineMode mode,
                               EmbeddingBackend& backend) {
  if (mode == CombineMode::SeparateEmbeddings) {
    if (per_source_texts.empty()) {
      throw Error("SeparateEmbeddings needs at least one source text");
    }
    const auto parts = embed_texts(per_source_texts, backend);
    return concatenate(parts);
  }
  std::string paragraph;
  for (const auto& sentence : per_source_texts) {
    if (sentence.empty()) continue;
    if (!paragraph.empty()) paragraph += ' ';
    paragraph += sentence;
  }
  return embed_text(paragraph, backend);
}

}  // namespace tabtext
