#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabtext/dataset.hpp"
#include "tabtext/embedding.hpp"
#include "tabtext/evaluation.hpp"
#include "tabtext/serializer.hpp"

namespace tabtext {

struct AblationOptions {
  bool extended = false;  // add the combine-sources axis (32 points)
  SerializationConfig base;
  SplitSpec split;
  std::size_t repeats = 1;
  bool normalize = true;
  TrainOptions train;
  EmbedOptions embed;
  std::size_t workers = 1;  // grid points evaluated concurrently
};

struct AblationRow {
  SerializationConfig config;
  double test_auroc = 0.0;
  double sd_auroc = 0.0;
  std::string split_hash;
};

struct AxisMean {
  std::string axis;   // "Missing Handling", "Meta Info", "Descriptiveness", "Combination"
  std::string value;  // table label, e.g. "Is missing"
  double mean = 0.0;
  std::size_t count = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // sorted by test_auroc, descending
  std::vector<AxisMean> axis_means;
  bool extended = false;
  std::size_t repeats = 1;
};

// Display labels used in the report tables.
std::string_view policy_label(MissingPolicy policy);
std::string_view meta_label(bool include_meta);
std::string_view descriptive_label(bool descriptive);
std::string_view combine_label(CombineMode mode);

// Per-axis means recomputed from `rows`, in fixed axis/value order.
std::vector<AxisMean> compute_axis_means(const std::vector<AblationRow>& rows, bool extended);

AblationReport run_ablation(const Dataset& dataset, EmbeddingBackend& backend,
                            const AblationOptions& options = {});

std::string format_report(const AblationReport& report);
nlohmann::json report_to_json(const AblationReport& report);

}  // namespace tabtext
