#pragma once

#include "tabtext/dataset.hpp"
#include "tabtext/embedding.hpp"
#include "tabtext/feature_matrix.hpp"
#include "tabtext/serializer.hpp"

namespace tabtext {

struct TabTextOptions {
  SerializationConfig serialization;
  bool normalize = true;  // weighted average rather than raw weighted sum
  EmbedOptions embed;
};

// serialize -> embed -> aggregate for every entity of the dataset.
//
// SeparateEmbeddings: one embedding block per source, concatenated in source
// order; time-series rows are timestamp-aggregated; a source without rows for
// an entity contributes zeros.
// SingleParagraph: static sentences form one paragraph; each time-series row
// is embedded as that paragraph followed by the row's sentence, and the row
// paragraphs are timestamp-aggregated (static paragraph alone when the entity
// has no time-series rows).
FeatureMatrix build_tabtext_features(const Dataset& dataset, EmbeddingBackend& backend,
                                     const TabTextOptions& options = {});

}  // namespace tabtext
