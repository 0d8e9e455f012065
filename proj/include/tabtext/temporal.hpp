#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabtext/embedding.hpp"

namespace tabtext {

struct TimedEmbedding {
  double timestamp = 0.0;
  Embedding embedding;
};

// Timestamp-weighted combination of one entity's row embeddings.
//   normalize=true:  sum(t_i * e_i) / sum(t_i)
//   normalize=false: sum(t_i * e_i)
// All-zero timestamps fall back to the plain mean (normalize) or zeros.
// Terms are summed in (timestamp, values, input index) order so the result
// does not depend on input order.
Embedding aggregate_timed(std::span<const TimedEmbedding> series, bool normalize = true);

struct RowEmbedding {
  std::optional<double> timestamp;
  Embedding embedding;
};

struct SourceContribution {
  std::string source;
  bool time_series = false;
  std::size_t dim = 0;  // used for the zero vector when `rows` is empty
  std::vector<RowEmbedding> rows;
};

// Per source: time series through aggregate_timed, static rows pass through
// (more than one row is an AmbiguityError), absent sources become zeros.
// SeparateEmbeddings concatenates in the given order; SingleParagraph
// averages the per-source vectors of the sources that have rows.
Embedding aggregate_entity(std::string_view entity_id, std::span<const SourceContribution> sources,
                           CombineMode mode, bool normalize = true);

}  // namespace tabtext
