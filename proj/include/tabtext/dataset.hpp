#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tabtext/data_model.hpp"

namespace tabtext {

struct Source {
  TableSchema schema;
  std::vector<Row> rows;

  const std::string& name() const { return schema.name; }
};

// Parsed sources plus the entity universe every feature matrix is indexed by.
struct Dataset {
  std::vector<Source> sources;
  std::vector<std::string> entities;
  std::optional<std::vector<int>> labels;  // aligned with entities

  // Entity id -> position in `entities`.
  std::unordered_map<std::string, std::size_t> entity_index() const;

  // Row indices of each entity in one source, in file order. An entity_id
  // outside the universe raises ConsistencyError.
  std::vector<std::vector<std::size_t>> rows_by_entity(std::size_t source) const;
};

// Labels file: "entity_id,label" header then one 0/1 label per entity.
struct LabelTable {
  std::vector<std::string> entities;
  std::vector<int> labels;
};
LabelTable parse_labels(std::string_view text);

// Universe = label entities when labels are given, otherwise the union of
// entity ids across sources in order of first appearance.
Dataset make_dataset(std::vector<Source> sources, std::optional<LabelTable> labels = std::nullopt);

}  // namespace tabtext
