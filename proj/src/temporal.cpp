#include "tabtext/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabtext/error.hpp"

namespace tabtext {

Embedding aggregate_timed(std::span<const TimedEmbedding> series, bool normalize) {
  if (series.empty()) throw AggregationError("cannot aggregate an empty time series");
  const std::size_t dim = series.front().embedding.dim();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series[i].timestamp;
    if (!std::isfinite(t) || t < 0.0) {
      throw AggregationError("timestamp at position " + std::to_string(i) +
                             " must be finite and non-negative");
    }
    if (series[i].embedding.dim() != dim) {
      throw AggregationError("embedding at position " + std::to_string(i) + " has dimension " +
                             std::to_string(series[i].embedding.dim()) + ", expected " +
                             std::to_string(dim));
    }
  }

  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = series[a];
    const auto& y = series[b];
    if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
    if (x.embedding.values != y.embedding.values) return x.embedding.values < y.embedding.values;
    return a < b;
  });

  double total_weight = 0.0;
  for (std::size_t i : order) total_weight += series[i].timestamp;

  Embedding out = Embedding::zeros(dim);
  if (total_weight == 0.0) {
    if (!normalize) return out;
    for (std::size_t i : order) {
      const auto& e = series[i].embedding.values;
      for (std::size_t d = 0; d < dim; ++d) out.values[d] += e[d];
    }
    const double n = static_cast<double>(series.size());
    for (double& v : out.values) v /= n;
    return out;
  }

  for (std::size_t i : order) {
    const double w = series[i].timestamp;
    const auto& e = series[i].embedding.values;
    for (std::size_t d = 0; d < dim; ++d) out.values[d] += w * e[d];
  }
  if (normalize) {
    for (double& v : out.values) v /= total_weight;
  }
  return out;
}

Embedding aggregate_entity(std::string_view entity_id, std::span<const SourceContribution> sources,
                           CombineMode mode, bool normalize) {
  std::vector<Embedding> parts;
  std::vector<bool> has_rows;
  parts.reserve(sources.size());
  for (const auto& source : sources) {
    if (source.rows.empty()) {
      parts.push_back(Embedding::zeros(source.dim));
      has_rows.push_back(false);
      continue;
    }
    has_rows.push_back(true);
    if (source.time_series) {
      std::vector<TimedEmbedding> series;
      series.reserve(source.rows.size());
      for (const auto& row : source.rows) {
        if (!row.timestamp) {
          throw AggregationError("row of entity '" + std::string(entity_id) +
                                 "' in time-series source '" + source.source +
                                 "' has no timestamp");
        }
        series.push_back({*row.timestamp, row.embedding});
      }
      try {
        parts.push_back(aggregate_timed(series, normalize));
      } catch (const AggregationError& e) {
        throw AggregationError("entity '" + std::string(entity_id) + "', source '" +
                               source.source + "': " + e.what());
      }
    } else {
      if (source.rows.size() > 1) throw AmbiguityError(std::string(entity_id), source.source);
      parts.push_back(source.rows.front().embedding);
    }
  }

  if (mode == CombineMode::SeparateEmbeddings) return concatenate(parts);

  std::size_t dim = 0;
  for (const auto& p : parts) dim = std::max(dim, p.dim());
  Embedding mean = Embedding::zeros(dim);
  std::size_t used = 0;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    if (!has_rows[s]) continue;
    if (parts[s].dim() != dim) {
      throw AggregationError("SingleParagraph sources of entity '" + std::string(entity_id) +
                             "' disagree on dimension");
    }
    for (std::size_t d = 0; d < dim; ++d) mean.values[d] += parts[s].values[d];
    ++used;
  }
  if (used > 1) {
    for (double& v : mean.values) v /= static_cast<double>(used);
  }
  return mean;
}

}  // namespace tabtext
