#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "tabtext/error.hpp"
#include "tabtext/run_config.hpp"

using namespace tabtext;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() {
  const fs::path dir = fs::path(TABTEXT_TEST_WORK_DIR) / "run_config";
  fs::create_directories(dir / "data");
  for (const char* f : {"data/a.csv", "data/a.schema.json", "data/labels.csv"}) std::ofstream(dir / f) << "x";
  return dir;
}

nlohmann::json sample() {
  return nlohmann::json::parse(R"({
    "sources": [{"data": "data/a.csv", "schema": "data/a.schema.json"}],
    "labels": "data/labels.csv",
    "serialization": {"missing_policy": "ZeroPad", "include_meta": false, "descriptive": false,
                      "combine_sources": "SingleParagraph"},
    "embedding": {"backend": "hashing", "dim": 32, "max_chars": 100, "cache": "cache.bin", "batch_size": 8},
    "temporal": {"normalize": false},
    "evaluation": {"train_fraction": 0.7, "seed": 5, "stratified": false, "repeats": 3},
    "baseline": {"max_categories": 4},
    "workers": 2,
    "output": "results"
  })");
}

}  // namespace

TEST_CASE("parse every field", "[run_config]") {
  const auto dir = config_dir();
  const auto c = run_config_from_json(sample(), dir);
  REQUIRE(c.sources.size() == 1);
  CHECK(c.sources[0].data == "data/a.csv");
  CHECK(c.serialization.missing_policy == MissingPolicy::ZeroPad);
  CHECK_FALSE(c.serialization.include_meta);
  CHECK_FALSE(c.serialization.descriptive);
  CHECK(c.serialization.combine_sources == CombineMode::SingleParagraph);
  CHECK(c.embedding.dim == 32);
  CHECK(c.embedding.max_chars == 100);
  CHECK(c.embedding.batch_size == 8);
  CHECK_FALSE(c.temporal.normalize);
  CHECK(c.evaluation.split.train_fraction == 0.7);
  CHECK(c.evaluation.split.seed == 5);
  CHECK_FALSE(c.evaluation.split.stratified);
  CHECK(c.evaluation.repeats == 3);
  CHECK(c.baseline.max_categories == 4);
  CHECK(c.workers == 2);
  CHECK(c.resolve("data/a.csv") == dir / "data/a.csv");
  CHECK(c.resolve("/abs/path") == fs::path("/abs/path"));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("defaults and JSON round trip", "[run_config]") {
  const auto dir = config_dir();
  nlohmann::json minimal = {{"sources", {{{"data", "data/a.csv"}, {"schema", "data/a.schema.json"}}}}};
  const auto c = run_config_from_json(minimal, dir);
  CHECK(c.serialization.missing_policy == MissingPolicy::EncodeMissing);
  CHECK(c.serialization.include_meta);
  CHECK_FALSE(c.serialization.descriptive);
  CHECK(c.embedding.backend == "hashing");
  CHECK(c.evaluation.split.seed == 42);
  CHECK(c.evaluation.split.train_fraction == 0.8);
  CHECK(c.labels.empty());

  const auto full = run_config_from_json(sample(), dir);
  const auto again = run_config_from_json(run_config_to_json(full), dir);
  CHECK(run_config_to_json(again) == run_config_to_json(full));
}

TEST_CASE("unknown keys are rejected at every level", "[run_config]") {
  const auto dir = config_dir();
  for (const char* pointer : {"/bogus", "/embedding/dims", "/evaluation/folds", "/serialization/meta",
                              "/temporal/decay", "/baseline/top_k"}) {
    auto doc = sample();
    doc[nlohmann::json::json_pointer(pointer)] = 1;
    INFO(pointer);
    CHECK_THROWS_AS(run_config_from_json(doc, dir), ValidationError);
  }
  auto doc = sample();
  doc["sources"][0]["kind"] = "x";
  CHECK_THROWS_AS(run_config_from_json(doc, dir), ValidationError);
}

TEST_CASE("malformed values are ValidationErrors", "[run_config]") {
  const auto dir = config_dir();
  auto doc = sample();
  doc["embedding"]["dim"] = "many";
  CHECK_THROWS_AS(run_config_from_json(doc, dir), ValidationError);
  doc = sample();
  doc["serialization"]["missing_policy"] = "Drop";
  CHECK_THROWS_AS(run_config_from_json(doc, dir), Error);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json::array(), dir), ValidationError);
  doc = sample();
  doc["sources"][0].erase("schema");
  CHECK_THROWS_AS(run_config_from_json(doc, dir), ValidationError);
}

TEST_CASE("validate", "[run_config]") {
  const auto dir = config_dir();
  auto with = [&](const char* pointer, nlohmann::json value) {
    auto doc = sample();
    doc[nlohmann::json::json_pointer(pointer)] = std::move(value);
    return run_config_from_json(doc, dir);
  };
  CHECK_THROWS_AS(with("/sources", nlohmann::json::array()).validate(), ValidationError);
  CHECK_THROWS_AS(with("/sources/0/data", "data/none.csv").validate(), ValidationError);
  CHECK_THROWS_AS(with("/labels", "data/none.csv").validate(), ValidationError);
  CHECK_THROWS_AS(with("/embedding/dim", 0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/embedding/max_chars", 0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/embedding/backend", "remote").validate(), ValidationError);
  CHECK_THROWS_AS(with("/embedding/backend", "local").validate(), ValidationError);
  CHECK_THROWS_AS(with("/embedding/backend", "word2vec").validate(), ValidationError);
  CHECK_THROWS_AS(with("/evaluation/train_fraction", 1.0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/evaluation/train_fraction", 0.0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/evaluation/repeats", 0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/baseline/max_categories", 0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/workers", 0).validate(), ValidationError);
  CHECK_THROWS_AS(with("/output", "").validate(), ValidationError);
}

TEST_CASE("config hash ignores operational fields only", "[run_config]") {
  const auto dir = config_dir();
  const auto base = run_config_from_json(sample(), dir);
  const auto h = config_hash(base);
  CHECK(h.size() == 64);

  auto c = base;
  c.output = "elsewhere";
  c.workers = 7;
  c.embedding.cache = "";
  c.embedding.batch_size = 1;
  CHECK(config_hash(c) == h);

  c = base;
  c.evaluation.split.seed = 6;
  CHECK(config_hash(c) != h);
  c = base;
  c.serialization.include_meta = true;
  CHECK(config_hash(c) != h);
  c = base;
  c.embedding.dim = 33;
  CHECK(config_hash(c) != h);
}

TEST_CASE("load_run_config resolves against the file's directory", "[run_config]") {
  const auto dir = config_dir();
  std::ofstream(dir / "run.json") << sample().dump();
  const auto c = load_run_config(dir / "run.json");
  CHECK(c.resolve(c.sources[0].data) == dir / "data/a.csv");
  CHECK_NOTHROW(c.validate());
  std::ofstream(dir / "broken.json") << "{\"sources\": [";
  CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ValidationError);
  CHECK_THROWS_AS(load_run_config(dir / "absent.json"), ValidationError);
}
