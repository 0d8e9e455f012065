#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tabtext/data_model.hpp"
#include "tabtext/dataset.hpp"
#include "tabtext/feature_matrix.hpp"

namespace tabtext {

// The max_categories most frequent Present values (ties broken
// lexicographically); anything else present maps to "other".
class CategoryVocabulary {
 public:
  static CategoryVocabulary fit(std::span<const CellValue> values, std::size_t max_categories);

  const std::vector<std::string>& categories() const noexcept { return categories_; }
  // categories() followed by "other".
  std::vector<std::string> column_names() const;
  std::size_t width() const noexcept { return categories_.size() + 1; }
  // Column hit by a value; npos for Missing.
  std::size_t column_of(const CellValue& value) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::string> categories_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct OneHotColumns {
  std::vector<std::string> names;               // categories then "other"
  std::vector<std::vector<double>> columns;     // one 0/1 column per name
};

OneHotColumns encode_categorical(std::span<const CellValue> values, std::size_t max_categories);

struct SeriesSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;        // sample variance, 0 when count <= 1
  double average_change = 0.0;  // (last - first) / (count - 1) in time order
  std::size_t count = 0;
};

inline constexpr const char* kSummaryStatNames[] = {"mean",     "min",            "max",
                                                    "variance", "average_change", "count"};

SeriesSummary summarize_series(std::span<const std::pair<double, double>> points);

struct BaselineOptions {
  std::size_t max_categories = 10;
};

// Traditional preprocessing: numeric pass-through with Missing -> 0,
// binary/categorical one-hot with capping, time-series numeric columns as six
// summary statistics. Free-text columns are dropped.
FeatureMatrix build_baseline_features(const Dataset& dataset, const BaselineOptions& options = {});

}  // namespace tabtext
