#include "tabtext/dataset.hpp"

#include <unordered_set>

#include "tabtext/csv.hpp"
#include "tabtext/error.hpp"

namespace tabtext {

std::unordered_map<std::string, std::size_t> Dataset::entity_index() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) index.emplace(entities[i], i);
  return index;
}

std::vector<std::vector<std::size_t>> Dataset::rows_by_entity(std::size_t source) const {
  const auto index = entity_index();
  const auto& src = sources.at(source);
  std::vector<std::vector<std::size_t>> grouped(entities.size());
  for (std::size_t r = 0; r < src.rows.size(); ++r) {
    const auto it = index.find(src.rows[r].entity_id);
    if (it == index.end()) {
      throw ConsistencyError("entity '" + src.rows[r].entity_id + "' in source '" + src.name() +
                             "' is not in the entity universe");
    }
    grouped[it->second].push_back(r);
  }
  return grouped;
}

LabelTable parse_labels(std::string_view text) {
  const auto records = csv::read(text);
  if (records.empty()) throw ParseError(1, "labels file is empty");
  const auto& header = records.front().fields;
  if (header.size() != 2 || header[1] != "label") {
    throw ParseError(records.front().line, "labels header must be '<entity column>,label'");
  }
  LabelTable table;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 2) throw ParseError(rec.line, "expected 2 fields");
    if (rec.fields[1] != "0" && rec.fields[1] != "1") {
      throw ParseError(rec.line, "label must be 0 or 1, got '" + rec.fields[1] + "'");
    }
    if (!seen.insert(rec.fields[0]).second) {
      throw ParseError(rec.line, "duplicate entity '" + rec.fields[0] + "'");
    }
    table.entities.push_back(rec.fields[0]);
    table.labels.push_back(rec.fields[1] == "1" ? 1 : 0);
  }
  return table;
}

Dataset make_dataset(std::vector<Source> sources, std::optional<LabelTable> labels) {
  Dataset dataset;
  dataset.sources = std::move(sources);
  if (labels) {
    dataset.entities = std::move(labels->entities);
    dataset.labels = std::move(labels->labels);
  } else {
    std::unordered_set<std::string> seen;
    for (const auto& source : dataset.sources) {
      for (const auto& row : source.rows) {
        if (seen.insert(row.entity_id).second) dataset.entities.push_back(row.entity_id);
      }
    }
  }
  return dataset;
}

}  // namespace tabtext
