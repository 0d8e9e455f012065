#include "tabtext/feature_matrix.hpp"

#include <cmath>

#include "tabtext/csv.hpp"
#include "tabtext/data_model.hpp"
#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

void FeatureMatrix::validate() const {
  if (values.size() != rows() * cols()) {
    throw ConsistencyError("feature matrix holds " + std::to_string(values.size()) +
                           " values for shape " + std::to_string(rows()) + " x " +
                           std::to_string(cols()));
  }
  if (labels && labels->size() != rows()) {
    throw ConsistencyError("feature matrix has " + std::to_string(labels->size()) +
                           " labels for " + std::to_string(rows()) + " entities");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ConsistencyError("non-finite value for entity '" + entity_ids[i / cols()] +
                             "', feature '" + feature_names[i % cols()] + "'");
    }
  }
}

std::string write_feature_matrix(const FeatureMatrix& matrix) {
  matrix.validate();
  std::vector<std::string> fields;
  fields.reserve(matrix.cols() + 2);
  fields.emplace_back("entity_id");
  if (matrix.labels) fields.emplace_back("label");
  fields.insert(fields.end(), matrix.feature_names.begin(), matrix.feature_names.end());
  std::string out = csv::format_record(fields);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    fields.clear();
    fields.push_back(matrix.entity_ids[r]);
    if (matrix.labels) fields.push_back(std::to_string((*matrix.labels)[r]));
    for (double v : matrix.row(r)) fields.push_back(format_double(v));
    out += csv::format_record(fields);
  }
  return out;
}

FeatureMatrix read_feature_matrix(std::string_view text) {
  const auto records = csv::read(text);
  if (records.empty() || records.front().fields.empty() ||
      records.front().fields.front() != "entity_id") {
    throw ParseError(1, "feature matrix header must start with entity_id");
  }
  const auto& header = records.front().fields;
  const bool has_label = header.size() > 1 && header[1] == "label";
  const std::size_t first_feature = has_label ? 2 : 1;

  FeatureMatrix m;
  m.feature_names.assign(header.begin() + static_cast<std::ptrdiff_t>(first_feature), header.end());
  if (has_label) m.labels.emplace();
  m.values.reserve((records.size() - 1) * m.cols());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError(rec.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(rec.fields.size()));
    }
    m.entity_ids.push_back(rec.fields[0]);
    if (has_label) {
      const auto& label = rec.fields[1];
      if (label != "0" && label != "1") throw ParseError(rec.line, "label must be 0 or 1");
      m.labels->push_back(label == "1" ? 1 : 0);
    }
    for (std::size_t c = first_feature; c < rec.fields.size(); ++c) {
      const auto value = parse_number(rec.fields[c]);
      if (!value) {
        throw ParseError(rec.line, "feature '" + header[c] + "' is not a finite number");
      }
      m.values.push_back(*value);
    }
  }
  return m;
}

}  // namespace tabtext
