#include "tabtext/tabtext_features.hpp"

#include "tabtext/error.hpp"
#include "tabtext/temporal.hpp"

namespace tabtext {

namespace {

std::string join_paragraph(const std::vector<std::string>& sentences) {
  std::string paragraph;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    if (!paragraph.empty()) paragraph += ' ';
    paragraph += s;
  }
  return paragraph;
}

FeatureMatrix make_matrix(const Dataset& dataset, std::vector<std::string> names,
                          const std::vector<Embedding>& rows) {
  FeatureMatrix m;
  m.entity_ids = dataset.entities;
  m.feature_names = std::move(names);
  m.labels = dataset.labels;
  m.values.reserve(m.rows() * m.cols());
  for (const auto& e : rows) {
    if (e.dim() != m.cols()) {
      throw ConsistencyError("entity embedding has dimension " + std::to_string(e.dim()) +
                             ", expected " + std::to_string(m.cols()));
    }
    m.values.insert(m.values.end(), e.values.begin(), e.values.end());
  }
  m.validate();
  return m;
}

// Re-raises a backend failure with the source and entity of the failing text.
std::vector<Embedding> embed_with_context(const std::vector<std::string>& texts,
                                          const std::vector<std::string>& context,
                                          EmbeddingBackend& backend, const EmbedOptions& options) {
  try {
    return embed_texts(texts, backend, options);
  } catch (const BackendError& e) {
    if (e.text_index() >= context.size()) throw;
    throw BackendError(e.detail() + " [" + context[e.text_index()] + "]", e.text_index());
  }
}

std::string describe_origin(std::string_view source, std::string_view entity) {
  return "source '" + std::string(source) + "', entity '" + std::string(entity) + "'";
}

}  // namespace

FeatureMatrix build_tabtext_features(const Dataset& dataset, EmbeddingBackend& backend,
                                     const TabTextOptions& options) {
  const auto& config = options.serialization;
  const std::size_t n_entities = dataset.entities.size();
  const std::size_t n_sources = dataset.sources.size();
  const std::size_t dim = backend.dim();

  std::vector<std::vector<std::vector<std::size_t>>> grouped(n_sources);
  std::vector<std::vector<std::string>> sentences(n_sources);
  for (std::size_t s = 0; s < n_sources; ++s) {
    const auto& source = dataset.sources[s];
    grouped[s] = dataset.rows_by_entity(s);
    if (!source.schema.is_time_series()) {
      for (std::size_t e = 0; e < n_entities; ++e) {
        if (grouped[s][e].size() > 1) throw AmbiguityError(dataset.entities[e], source.name());
      }
    }
    sentences[s].reserve(source.rows.size());
    for (const auto& row : source.rows) {
      sentences[s].push_back(serialize_row(source.schema, row, config));
    }
  }

  std::vector<Embedding> entity_vectors;
  entity_vectors.reserve(n_entities);

  if (config.combine_sources == CombineMode::SeparateEmbeddings) {
    std::vector<std::string> texts;
    std::vector<std::string> origin;
    std::vector<std::size_t> offset(n_sources);
    for (std::size_t s = 0; s < n_sources; ++s) {
      offset[s] = texts.size();
      texts.insert(texts.end(), sentences[s].begin(), sentences[s].end());
      for (const auto& row : dataset.sources[s].rows) {
        origin.push_back(describe_origin(dataset.sources[s].name(), row.entity_id));
      }
    }
    const auto embedded = embed_with_context(texts, origin, backend, options.embed);

    std::vector<std::string> names;
    names.reserve(n_sources * dim);
    for (const auto& source : dataset.sources) {
      for (std::size_t d = 0; d < dim; ++d) names.push_back(source.name() + ".emb" + std::to_string(d));
    }
    std::vector<SourceContribution> parts(n_sources);
    for (std::size_t e = 0; e < n_entities; ++e) {
      for (std::size_t s = 0; s < n_sources; ++s) {
        const auto& source = dataset.sources[s];
        auto& part = parts[s];
        part.source = source.name();
        part.time_series = source.schema.is_time_series();
        part.dim = dim;
        part.rows.clear();
        for (std::size_t r : grouped[s][e]) {
          part.rows.push_back({source.rows[r].timestamp, embedded[offset[s] + r]});
        }
      }
      entity_vectors.push_back(aggregate_entity(dataset.entities[e], parts,
                                                CombineMode::SeparateEmbeddings, options.normalize));
    }
    return make_matrix(dataset, std::move(names), entity_vectors);
  }

  // SingleParagraph
  std::vector<std::string> texts;
  std::vector<std::string> origin;
  std::vector<std::vector<std::pair<double, std::size_t>>> timed_texts(n_entities);
  std::vector<std::size_t> static_text(n_entities, 0);
  for (std::size_t e = 0; e < n_entities; ++e) {
    std::vector<std::string> static_sentences;
    for (std::size_t s = 0; s < n_sources; ++s) {
      if (dataset.sources[s].schema.is_time_series() || grouped[s][e].empty()) continue;
      static_sentences.push_back(sentences[s][grouped[s][e].front()]);
    }
    bool has_series = false;
    for (std::size_t s = 0; s < n_sources; ++s) {
      if (!dataset.sources[s].schema.is_time_series()) continue;
      for (std::size_t r : grouped[s][e]) {
        auto paragraph_parts = static_sentences;
        paragraph_parts.push_back(sentences[s][r]);
        timed_texts[e].emplace_back(*dataset.sources[s].rows[r].timestamp, texts.size());
        texts.push_back(join_paragraph(paragraph_parts));
        origin.push_back(describe_origin(dataset.sources[s].name(), dataset.entities[e]));
        has_series = true;
      }
    }
    if (!has_series) {
      static_text[e] = texts.size();
      texts.push_back(join_paragraph(static_sentences));
      origin.push_back(describe_origin("paragraph", dataset.entities[e]));
    }
  }
  const auto embedded = embed_with_context(texts, origin, backend, options.embed);

  std::vector<std::string> names;
  names.reserve(dim);
  for (std::size_t d = 0; d < dim; ++d) names.push_back("paragraph.emb" + std::to_string(d));
  for (std::size_t e = 0; e < n_entities; ++e) {
    SourceContribution part;
    part.source = "paragraph";
    part.dim = dim;
    if (timed_texts[e].empty()) {
      part.rows.push_back({std::nullopt, embedded[static_text[e]]});
    } else {
      part.time_series = true;
      for (const auto& [t, idx] : timed_texts[e]) part.rows.push_back({t, embedded[idx]});
    }
    entity_vectors.push_back(aggregate_entity(dataset.entities[e], std::span(&part, 1),
                                              CombineMode::SingleParagraph, options.normalize));
  }
  return make_matrix(dataset, std::move(names), entity_vectors);
}

}  // namespace tabtext
