#include "tabtext/backends.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tabtext/digest.hpp"
#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

namespace {

bool is_alnum_ascii(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;

template <typename Visit>
void for_each_token(std::string_view text, bool lowercase, Visit&& visit) {
  std::string token;
  for (char c : text) {
    if (is_alnum_ascii(c)) {
      token.push_back(lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (!token.empty()) {
      visit(token);
      token.clear();
    }
  }
  if (!token.empty()) visit(token);
}

void l2_normalize(std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  if (sum <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sum);
  for (double& v : values) v *= inv;
}

}  // namespace

std::vector<std::string> tokenize_alnum(std::string_view text) {
  std::vector<std::string> tokens;
  for_each_token(text, true, [&](const std::string& t) { tokens.push_back(t); });
  return tokens;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// HashingBackend

HashingBackend::HashingBackend(std::size_t dim, std::size_t max_chars)
    : EmbeddingBackend(dim, max_chars) {}

std::string HashingBackend::id() const { return "hashing-fnv1a-v1:dim=" + std::to_string(dim()); }

Embedding HashingBackend::embed_one(std::string_view text) const {
  std::vector<double> values(dim(), 0.0);
  for_each_token(text, true, [&](const std::string& token) {
    const std::size_t bucket = fnv1a64(token) % dim();
    const bool negative = (mix64(fnv1a64(token, kSignBasis)) & 1U) != 0;
    values[bucket] += negative ? -1.0 : 1.0;
  });
  l2_normalize(values);
  return Embedding(std::move(values));
}

std::vector<Embedding> HashingBackend::embed_batch(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

// ---------------------------------------------------------------------------
// RemoteBackend

RemoteBackend::RemoteBackend(std::string url, std::size_t dim, std::size_t max_chars,
                             std::size_t max_in_flight, int timeout_seconds)
    : EmbeddingBackend(dim, max_chars),
      url_(std::move(url)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      timeout_seconds_(timeout_seconds) {
  constexpr std::string_view scheme = "http://";
  if (!std::string_view(url_).starts_with(scheme)) {
    throw ValidationError("remote backend URL must start with http:// (got '" + url_ + "')");
  }
  std::string_view rest = std::string_view(url_).substr(scheme.size());
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  path_ = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    host_ = std::string(authority.substr(0, colon));
    const auto port = parse_number(authority.substr(colon + 1));
    if (!port || *port < 1 || *port > 65535 || std::floor(*port) != *port) {
      throw ValidationError("invalid port in remote backend URL '" + url_ + "'");
    }
    port_ = static_cast<int>(*port);
  } else {
    host_ = std::string(authority);
  }
  if (host_.empty()) throw ValidationError("remote backend URL has no host: '" + url_ + "'");
}

std::string RemoteBackend::id() const {
  return "remote:" + url_ + ":dim=" + std::to_string(dim());
}

std::vector<Embedding> RemoteBackend::embed_batch(std::span<const std::string> texts) {
  nlohmann::json request;
  request["texts"] = std::vector<std::string>(texts.begin(), texts.end());

  httplib::Client client(host_, port_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  client.set_write_timeout(timeout_seconds_);
  const auto response = client.Post(path_, request.dump(), "application/json");
  if (!response) {
    throw BackendError("remote backend " + url_ + " unreachable: " +
                           httplib::to_string(response.error()),
                       0);
  }
  if (response->status != 200) {
    throw BackendError("remote backend " + url_ + " returned HTTP " +
                           std::to_string(response->status),
                       0);
  }
  std::vector<Embedding> out;
  try {
    const auto body = nlohmann::json::parse(response->body);
    const auto reported_dim = body.at("dim").get<std::size_t>();
    if (reported_dim != dim()) {
      throw BackendError("remote backend reports dim " + std::to_string(reported_dim) +
                             ", configured " + std::to_string(dim()),
                         0);
    }
    const auto& embeddings = body.at("embeddings");
    if (!embeddings.is_array() || embeddings.size() != texts.size()) {
      throw BackendError("remote backend returned " + std::to_string(embeddings.size()) +
                             " embeddings for " + std::to_string(texts.size()) + " texts",
                         0);
    }
    out.reserve(texts.size());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      auto values = embeddings[i].get<std::vector<double>>();
      if (values.size() != dim()) {
        throw BackendError("remote embedding has dimension " + std::to_string(values.size()) +
                               ", expected " + std::to_string(dim()),
                           i);
      }
      out.emplace_back(std::move(values));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response from remote backend: ") + e.what(), 0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LocalModelBackend

namespace {

nlohmann::json read_model_config(const std::filesystem::path& dir) {
  try {
    return nlohmann::json::parse(read_file((dir / "config.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("model config in '" + dir.string() + "' is not valid JSON: " + e.what());
  } catch (const Error& e) {
    throw BackendError(std::string("cannot load local model: ") + e.what());
  }
}

std::size_t model_dim(const std::filesystem::path& dir) {
  const auto config = read_model_config(dir);
  const auto dim = config.value("dim", std::size_t{0});
  if (dim == 0) throw BackendError("model config in '" + dir.string() + "' has no positive dim");
  return dim;
}

}  // namespace

LocalModelBackend::LocalModelBackend(const std::filesystem::path& model_dir, std::size_t max_chars)
    : EmbeddingBackend(model_dim(model_dir), max_chars) {
  const auto config = read_model_config(model_dir);
  lowercase_ = config.value("lowercase", true);
  normalize_ = config.value("normalize", true);

  std::ifstream vocab(model_dir / "vocab.txt");
  if (!vocab) throw BackendError("cannot open vocab.txt in '" + model_dir.string() + "'");
  std::string token;
  std::size_t row = 0;
  while (std::getline(vocab, token)) {
    if (!token.empty() && token.back() == '\r') token.pop_back();
    vocab_.try_emplace(token, row);
    ++row;
  }

  std::string bytes;
  try {
    bytes = read_file((model_dir / "embeddings.f32").string());
  } catch (const Error& e) {
    throw BackendError(std::string("cannot load local model: ") + e.what());
  }
  const std::size_t expected = row * dim() * sizeof(float);
  if (bytes.size() != expected) {
    throw BackendError("embeddings.f32 holds " + std::to_string(bytes.size()) + " bytes, expected " +
                       std::to_string(expected) + " for " + std::to_string(row) + " x " +
                       std::to_string(dim()));
  }
  matrix_.resize(row * dim());
  std::memcpy(matrix_.data(), bytes.data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : matrix_) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  }
  id_ = "local:" + sha256_hex(bytes).substr(0, 16) + ":dim=" + std::to_string(dim());
}

std::vector<Embedding> LocalModelBackend::embed_batch(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> values(dim(), 0.0);
    std::size_t known = 0;
    for_each_token(text, lowercase_, [&](const std::string& token) {
      const auto it = vocab_.find(token);
      if (it == vocab_.end()) return;
      const float* row = matrix_.data() + it->second * dim();
      for (std::size_t d = 0; d < dim(); ++d) values[d] += row[d];
      ++known;
    });
    if (known > 0) {
      for (double& v : values) v /= static_cast<double>(known);
      if (normalize_) l2_normalize(values);
    }
    out.emplace_back(std::move(values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CachingBackend

CachingBackend::CachingBackend(std::shared_ptr<EmbeddingBackend> inner,
                               std::shared_ptr<EmbeddingCache> disk_cache)
    : EmbeddingBackend(inner->dim(), inner->max_chars()),
      inner_(std::move(inner)),
      disk_(std::move(disk_cache)) {}

std::vector<Embedding> CachingBackend::embed_batch(std::span<const std::string> texts) {
  const std::string backend_id = inner_->id();
  std::vector<Embedding> out(texts.size());
  std::vector<std::size_t> pending;
  {
    std::shared_lock lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto it = memory_.find(texts[i]);
      if (it != memory_.end()) out[i] = it->second;
      else pending.push_back(i);
    }
  }
  std::vector<std::size_t> misses;
  for (std::size_t i : pending) {
    if (disk_) {
      if (auto hit = disk_->get(backend_id, texts[i])) {
        if (hit->dim() == dim()) {
          out[i] = std::move(*hit);
          std::unique_lock lock(mutex_);
          memory_.try_emplace(texts[i], out[i]);
          continue;
        }
      }
    }
    misses.push_back(i);
  }
  hits_ += texts.size() - misses.size();
  misses_ += misses.size();
  if (misses.empty()) return out;

  std::vector<std::string> request;
  request.reserve(misses.size());
  for (std::size_t i : misses) request.push_back(texts[i]);
  std::vector<Embedding> fresh;
  try {
    fresh = inner_->embed_batch(request);
  } catch (const BackendError& e) {
    const std::size_t local = e.text_index();
    throw BackendError(e.detail(), local < misses.size() ? misses[local] : BackendError::npos);
  }
  if (fresh.size() != request.size()) {
    throw BackendError("backend returned " + std::to_string(fresh.size()) + " embeddings for " +
                       std::to_string(request.size()) + " texts");
  }
  for (std::size_t k = 0; k < misses.size(); ++k) {
    out[misses[k]] = fresh[k];
    if (fresh[k].dim() == dim() && fresh[k].all_finite()) {
      if (disk_) disk_->put(backend_id, request[k], fresh[k]);
      std::unique_lock lock(mutex_);
      memory_.try_emplace(request[k], fresh[k]);
    }
  }
  return out;
}

std::shared_ptr<CachingBackend> make_backend(const BackendSettings& settings) {
  if (settings.dim == 0) throw ValidationError("embedding.dim must be positive");
  if (settings.max_chars == 0) throw ValidationError("embedding.max_chars must be positive");

  std::shared_ptr<EmbeddingBackend> inner;
  if (settings.backend == "hashing") {
    inner = std::make_shared<HashingBackend>(settings.dim, settings.max_chars);
  } else if (settings.backend == "remote") {
    if (settings.url.empty()) throw ValidationError("remote backend needs embedding.url");
    inner = std::make_shared<RemoteBackend>(settings.url, settings.dim, settings.max_chars);
  } else if (settings.backend == "local") {
    if (settings.model_dir.empty()) throw ValidationError("local backend needs embedding.model_dir");
    auto local = std::make_shared<LocalModelBackend>(settings.model_dir, settings.max_chars);
    if (local->dim() != settings.dim) {
      throw BackendError("local model dimension " + std::to_string(local->dim()) +
                         " differs from configured dim " + std::to_string(settings.dim));
    }
    inner = std::move(local);
  } else {
    throw ValidationError("unknown embedding backend '" + settings.backend +
                          "' (expected hashing, remote or local)");
  }
  std::shared_ptr<EmbeddingCache> disk;
  if (!settings.cache.empty()) disk = std::make_shared<EmbeddingCache>(settings.cache);
  return std::make_shared<CachingBackend>(std::move(inner), std::move(disk));
}

}  // namespace tabtext
