#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tabtext {

// Rows are entities, columns are features; values stored row-major.
struct FeatureMatrix {
  std::vector<std::string> entity_ids;
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::optional<std::vector<int>> labels;

  std::size_t rows() const noexcept { return entity_ids.size(); }
  std::size_t cols() const noexcept { return feature_names.size(); }

  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }

  // Shape and finiteness; throws ConsistencyError.
  void validate() const;
};

// CSV: "entity_id[,label],feature..." then one line per entity. Floats use
// the shortest round-trip decimal form.
std::string write_feature_matrix(const FeatureMatrix& matrix);
FeatureMatrix read_feature_matrix(std::string_view text);

}  // namespace tabtext
