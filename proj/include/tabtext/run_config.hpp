#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabtext/backends.hpp"
#include "tabtext/baseline.hpp"
#include "tabtext/evaluation.hpp"
#include "tabtext/serializer.hpp"

namespace tabtext {

struct SourceConfig {
  std::string data;
  std::string schema;
};

struct TemporalConfig {
  bool normalize = true;
};

struct EvaluationConfig {
  SplitSpec split{0.8, 42, true};
  std::size_t repeats = 1;
};

// Mirrors the config file field by field. Relative paths resolve against
// base_dir (the config file's directory), which is not itself serialised.
struct RunConfig {
  std::vector<SourceConfig> sources;
  std::string labels;
  SerializationConfig serialization;
  BackendSettings embedding;
  TemporalConfig temporal;
  EvaluationConfig evaluation;
  BaselineOptions baseline;
  std::size_t workers = 1;
  std::string output = "out";

  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;

  // Throws ValidationError: referenced paths must exist, dim and max_chars
  // must be positive, train_fraction in (0, 1).
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc, std::filesystem::path base_dir = {});
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Hash of the fields that determine results. Output location, cache path,
// worker count and batch size are excluded.
std::string config_hash(const RunConfig& config);

}  // namespace tabtext
