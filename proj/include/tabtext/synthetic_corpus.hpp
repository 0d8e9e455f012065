#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tabtext {

// Seeded generator for a four-source clinical-style corpus:
//   demographics (static), encounters (static, free-text diagnosis),
//   labs (static, numeric panel), vitals (time series, 1-10 rows per entity).
// Labels come from a logistic model over binary signal flags:
//   risk diagnosis  -- a high-risk term in the diagnosis text
//   elderly         -- age >= 65
//   lactate missing -- only when informative_missingness is on
// The intercept is solved so the expected positive rate equals positive_rate.
struct CorpusSpec {
  std::uint64_t seed = 7;
  std::size_t n_entities = 1590;
  double positive_rate = 121.0 / 1590.0;

  double missingness_rate = 0.1;               // background rate for non-signal columns
  std::map<std::string, double> column_missingness;  // per-column override
  std::string missing_token;                   // written for Missing cells

  double risk_prevalence = 0.12;
  double risk_strength = 6.0;   // logit effect of a risk diagnosis
  double age_strength = 1.0;    // logit effect of age >= 65

  bool informative_missingness = false;
  double informative_missing_rate = 0.3;  // P(lactate missing)
  double missing_strength = 4.0;           // logit effect of lactate missing

  std::size_t min_series_length = 1;
  std::size_t max_series_length = 10;

  void validate() const;  // rates in [0,1], sizes positive
};

struct SignalPattern {
  std::vector<bool> flags;  // aligned with CorpusGroundTruth::signal_names
  double probability = 0.0;  // P(pattern)
  double positive_probability = 0.0;  // P(label = 1 | pattern)
};

struct CorpusGroundTruth {
  std::vector<std::string> signal_names;
  std::vector<double> strengths;
  double intercept = 0.0;
  std::vector<SignalPattern> patterns;
  double expected_positive_rate = 0.0;
  double bayes_auroc = 0.0;  // population AUROC of P(label | signal flags)
};

// Closed-form ground truth of the label mechanism (independent of the seed).
CorpusGroundTruth corpus_ground_truth(const CorpusSpec& spec);

struct Corpus {
  std::map<std::string, std::string> files;  // file name -> contents
  CorpusGroundTruth truth;
  std::vector<std::string> entities;
  std::vector<int> labels;
  std::vector<double> oracle_scores;  // P(label | realised signal flags) per entity
};

// Deterministic in the seed. Files: <source>.csv, <source>.schema.json,
// labels.csv, ground_truth.json and a ready-to-run config.json.
Corpus generate_corpus(const CorpusSpec& spec);
void write_corpus(const Corpus& corpus, const std::filesystem::path& directory);

nlohmann::json corpus_spec_to_json(const CorpusSpec& spec);

}  // namespace tabtext
