#include "tabtext/run_config.hpp"

#include <set>

#include "tabtext/digest.hpp"
#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

namespace {

void reject_unknown(const nlohmann::json& object, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!known.contains(key)) throw ValidationError("unknown field '" + where + key + "' in run config");
  }
}

nlohmann::json semantic_json(const RunConfig& config) {
  auto doc = run_config_to_json(config);
  doc.erase("output");
  doc.erase("workers");
  doc["embedding"].erase("cache");
  doc["embedding"].erase("batch_size");
  return doc;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void RunConfig::validate() const {
  if (sources.empty()) throw ValidationError("run config lists no sources");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (const auto* path : {&sources[i].data, &sources[i].schema}) {
      if (path->empty()) throw ValidationError("source " + std::to_string(i) + " has an empty path");
      if (!std::filesystem::exists(resolve(*path))) {
        throw ValidationError("path does not exist: " + resolve(*path).string());
      }
    }
  }
  if (!labels.empty() && !std::filesystem::exists(resolve(labels))) {
    throw ValidationError("labels path does not exist: " + resolve(labels).string());
  }
  if (embedding.dim == 0) throw ValidationError("embedding.dim must be positive");
  if (embedding.max_chars == 0) throw ValidationError("embedding.max_chars must be positive");
  if (embedding.batch_size == 0) throw ValidationError("embedding.batch_size must be positive");
  if (embedding.backend == "remote") {
    if (embedding.url.empty()) throw ValidationError("remote backend needs embedding.url");
  } else if (embedding.backend == "local") {
    if (embedding.model_dir.empty() || !std::filesystem::is_directory(resolve(embedding.model_dir))) {
      throw ValidationError("local backend needs an existing embedding.model_dir");
    }
  } else if (embedding.backend != "hashing") {
    throw ValidationError("unknown embedding backend '" + embedding.backend + "'");
  }
  const double f = evaluation.split.train_fraction;
  if (!(f > 0.0 && f < 1.0)) throw ValidationError("evaluation.train_fraction must lie in (0, 1)");
  if (evaluation.repeats == 0) throw ValidationError("evaluation.repeats must be at least 1");
  if (baseline.max_categories == 0) throw ValidationError("baseline.max_categories must be at least 1");
  if (workers == 0) throw ValidationError("workers must be at least 1");
  if (output.empty()) throw ValidationError("output directory must be set");
}

RunConfig run_config_from_json(const nlohmann::json& doc, std::filesystem::path base_dir) {
  RunConfig config;
  config.base_dir = std::move(base_dir);
  try {
    if (!doc.is_object()) throw ValidationError("run config must be a JSON object");
    reject_unknown(doc, {"sources", "labels", "serialization", "embedding", "temporal", "evaluation",
                         "baseline", "workers", "output"},
                   "");
    for (const auto& s : doc.at("sources")) {
      reject_unknown(s, {"data", "schema"}, "sources.");
      config.sources.push_back({s.at("data").get<std::string>(), s.at("schema").get<std::string>()});
    }
    config.labels = doc.value("labels", "");
    if (doc.contains("serialization")) {
      const auto& s = doc.at("serialization");
      reject_unknown(s, {"missing_policy", "include_meta", "descriptive", "combine_sources"},
                     "serialization.");
      if (s.contains("missing_policy")) {
        config.serialization.missing_policy = parse_missing_policy(s.at("missing_policy").get<std::string>());
      }
      config.serialization.include_meta = s.value("include_meta", config.serialization.include_meta);
      config.serialization.descriptive = s.value("descriptive", config.serialization.descriptive);
      if (s.contains("combine_sources")) {
        config.serialization.combine_sources = parse_combine_mode(s.at("combine_sources").get<std::string>());
      }
    }
    if (doc.contains("embedding")) {
      const auto& e = doc.at("embedding");
      reject_unknown(e, {"backend", "dim", "max_chars", "cache", "url", "model_dir", "batch_size"},
                     "embedding.");
      auto& b = config.embedding;
      b.backend = e.value("backend", b.backend);
      b.dim = e.value("dim", b.dim);
      b.max_chars = e.value("max_chars", b.max_chars);
      b.cache = e.value("cache", b.cache);
      b.url = e.value("url", b.url);
      b.model_dir = e.value("model_dir", b.model_dir);
      b.batch_size = e.value("batch_size", b.batch_size);
    }
    if (doc.contains("temporal")) {
      reject_unknown(doc.at("temporal"), {"normalize"}, "temporal.");
      config.temporal.normalize = doc.at("temporal").value("normalize", true);
    }
    if (doc.contains("evaluation")) {
      const auto& e = doc.at("evaluation");
      reject_unknown(e, {"train_fraction", "seed", "stratified", "repeats"}, "evaluation.");
      auto& split = config.evaluation.split;
      split.train_fraction = e.value("train_fraction", split.train_fraction);
      split.seed = e.value("seed", split.seed);
      split.stratified = e.value("stratified", split.stratified);
      config.evaluation.repeats = e.value("repeats", config.evaluation.repeats);
    }
    if (doc.contains("baseline")) {
      reject_unknown(doc.at("baseline"), {"max_categories"}, "baseline.");
      config.baseline.max_categories = doc.at("baseline").value("max_categories", config.baseline.max_categories);
    }
    config.workers = doc.value("workers", config.workers);
    config.output = doc.value("output", config.output);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
  return config;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : config.sources) sources.push_back({{"data", s.data}, {"schema", s.schema}});
  const auto& b = config.embedding;
  const auto& split = config.evaluation.split;
  return {{"sources", sources},
          {"labels", config.labels},
          {"serialization",
           {{"missing_policy", std::string(to_string(config.serialization.missing_policy))},
            {"include_meta", config.serialization.include_meta},
            {"descriptive", config.serialization.descriptive},
            {"combine_sources", std::string(to_string(config.serialization.combine_sources))}}},
          {"embedding",
           {{"backend", b.backend},
            {"dim", b.dim},
            {"max_chars", b.max_chars},
            {"cache", b.cache},
            {"url", b.url},
            {"model_dir", b.model_dir},
            {"batch_size", b.batch_size}}},
          {"temporal", {{"normalize", config.temporal.normalize}}},
          {"evaluation",
           {{"train_fraction", split.train_fraction},
            {"seed", split.seed},
            {"stratified", split.stratified},
            {"repeats", config.evaluation.repeats}}},
          {"baseline", {{"max_categories", config.baseline.max_categories}}},
          {"workers", config.workers},
          {"output", config.output}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

std::string config_hash(const RunConfig& config) { return sha256_hex(semantic_json(config).dump()); }

}  // namespace tabtext
