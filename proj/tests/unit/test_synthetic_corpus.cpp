#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "tabtext/backends.hpp"
#include "tabtext/csv.hpp"
#include "tabtext/error.hpp"
#include "tabtext/evaluation.hpp"
#include "tabtext/pipeline.hpp"
#include "tabtext/synthetic_corpus.hpp"
#include "tabtext/tabtext_features.hpp"

using namespace tabtext;
namespace fs = std::filesystem;

namespace {

Dataset load(const Corpus& corpus, const std::string& name) {
  const fs::path dir = fs::path(TABTEXT_TEST_WORK_DIR) / name;
  fs::remove_all(dir);
  write_corpus(corpus, dir);
  return load_dataset(load_run_config(dir / "config.json"));
}

}  // namespace

TEST_CASE("generation is deterministic in the seed", "[corpus]") {
  CorpusSpec spec;
  spec.n_entities = 200;
  const auto a = generate_corpus(spec);
  const auto b = generate_corpus(spec);
  CHECK(a.files == b.files);
  CHECK(a.labels == b.labels);
  spec.seed = 8;
  CHECK(generate_corpus(spec).files != a.files);
}

TEST_CASE("corpus layout", "[corpus]") {
  CorpusSpec spec;
  spec.n_entities = 120;
  const auto corpus = generate_corpus(spec);
  for (const char* name : {"demographics.csv", "demographics.schema.json", "encounters.csv",
                           "encounters.schema.json", "labs.csv", "labs.schema.json", "vitals.csv",
                           "vitals.schema.json", "labels.csv", "ground_truth.json", "config.json"}) {
    CHECK(corpus.files.count(name) == 1);
  }
  CHECK(corpus.entities.size() == 120);
  CHECK(corpus.labels.size() == 120);
  CHECK(corpus.oracle_scores.size() == 120);

  const auto dataset = load(corpus, "corpus_layout");
  REQUIRE(dataset.sources.size() == 4);
  CHECK(dataset.entities == corpus.entities);
  CHECK(*dataset.labels == corpus.labels);
  for (const auto& source : dataset.sources) {
    if (source.name() != "vitals") {
      CHECK(source.rows.size() == 120);
      continue;
    }
    CHECK(source.schema.is_time_series());
    for (std::size_t e = 0; e < dataset.entities.size(); ++e) {
      const auto n = dataset.rows_by_entity(3)[e].size();
      CHECK(n >= 1);
      CHECK(n <= 10);
    }
  }
}

TEST_CASE("missingness zero yields no missing cells", "[corpus]") {
  CorpusSpec spec;
  spec.n_entities = 150;
  spec.missingness_rate = 0.0;
  const auto dataset = load(generate_corpus(spec), "corpus_complete");
  for (const auto& source : dataset.sources) {
    for (const auto& row : source.rows) {
      for (const auto& cell : row.cells) CHECK_FALSE(cell.is_missing());
    }
  }
}

TEST_CASE("a custom missing token is written and recognised", "[corpus]") {
  CorpusSpec spec;
  spec.n_entities = 100;
  spec.missingness_rate = 0.3;
  spec.missing_token = "NA";
  const auto corpus = generate_corpus(spec);
  CHECK(corpus.files.at("demographics.csv").find(",NA") != std::string::npos);
  const auto dataset = load(corpus, "corpus_token");
  std::size_t missing = 0;
  for (const auto& row : dataset.sources[0].rows) {
    for (const auto& cell : row.cells) missing += cell.is_missing();
  }
  CHECK(missing > 0);
}

TEST_CASE("default corpus positive count", "[corpus]") {
  const auto corpus = generate_corpus(CorpusSpec{});
  const auto positives = std::accumulate(corpus.labels.begin(), corpus.labels.end(), 0);
  CHECK(corpus.labels.size() == 1590);
  CHECK(corpus.truth.expected_positive_rate == Catch::Approx(121.0 / 1590.0).margin(1e-9));
  // Binomial sd is about 10.6.
  CHECK(std::abs(positives - 121) <= 35);
}

TEST_CASE("ground truth is internally consistent", "[corpus]") {
  CorpusSpec spec;
  spec.informative_missingness = true;
  const auto truth = corpus_ground_truth(spec);
  CHECK(truth.signal_names.size() == 3);
  double p = 0.0;
  double pos = 0.0;
  for (const auto& pattern : truth.patterns) {
    p += pattern.probability;
    pos += pattern.probability * pattern.positive_probability;
  }
  CHECK(p == Catch::Approx(1.0));
  CHECK(pos == Catch::Approx(truth.expected_positive_rate));
  CHECK(truth.bayes_auroc > 0.5);
  CHECK(truth.bayes_auroc < 1.0);
}

TEST_CASE("pipeline AUROC does not exceed the Bayes bound", "[corpus][slow]") {
  CorpusSpec spec;
  spec.n_entities = 600;
  spec.positive_rate = 0.15;
  HashingBackend backend(128);
  std::vector<double> aurocs;
  double bayes = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = 100 + seed;
    const auto corpus = generate_corpus(spec);
    bayes = corpus.truth.bayes_auroc;
    const auto dataset = load(corpus, "corpus_bayes");
    const auto features = build_tabtext_features(dataset, backend);
    aurocs.push_back(evaluate_features(features, SplitSpec{0.8, seed, true}).mean_auroc);
  }
  const double mean = std::accumulate(aurocs.begin(), aurocs.end(), 0.0) / 20.0;
  double ss = 0.0;
  for (double a : aurocs) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / 19.0);
  INFO("mean " << mean << " sd " << sd << " bayes " << bayes);
  CHECK(mean <= bayes + 3.0 * sd);
  CHECK(mean > 0.6);
}

TEST_CASE("spec validation", "[corpus]") {
  CorpusSpec spec;
  spec.n_entities = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = CorpusSpec{};
  spec.positive_rate = 1.5;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = CorpusSpec{};
  spec.missingness_rate = -0.1;
  CHECK_THROWS_AS(generate_corpus(spec), ValidationError);
  spec = CorpusSpec{};
  spec.min_series_length = 5;
  spec.max_series_length = 2;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}
