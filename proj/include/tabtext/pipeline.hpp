#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tabtext/ablation.hpp"
#include "tabtext/dataset.hpp"
#include "tabtext/run_config.hpp"

namespace tabtext {

// One line per stage on stderr: name, item count, wall time.
void set_stage_logging(bool enabled);
void log_stage(std::string_view stage, std::size_t items, std::chrono::steady_clock::duration wall,
               std::string_view detail = {});

// Parses every configured source and the labels file.
Dataset load_dataset(const RunConfig& config);

struct PipelineOptions {
  bool evaluate = true;
};

// parse -> serialize -> embed -> aggregate -> features (TabText and baseline)
// -> optional evaluation of both. Writes into config.output:
//   tabtext_features.csv, baseline_features.csv, report.txt, manifest.json
// and returns the manifest. Stage failures surface as StageError, backend
// failures as BackendError, both naming the stage.
nlohmann::json run_pipeline(const RunConfig& config, const PipelineOptions& options = {});

// Representation grid over the configured dataset. Writes ablation.txt,
// ablation.json and ablation_manifest.json into config.output.
nlohmann::json run_ablation_pipeline(const RunConfig& config, bool extended);

// Text of the TabText-vs-baseline comparison table.
std::string format_comparison(const EvalResult& tabtext, const EvalResult& baseline,
                              const SerializationConfig& serialization);

}  // namespace tabtext
