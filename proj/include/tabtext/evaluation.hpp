#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabtext/feature_matrix.hpp"

namespace tabtext {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// Entity positions (indices into the split input), each list ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Train size is round(train_fraction * N) clamped to [1, N-1]. Stratified
// mode rounds the positive share the same way, keeping each class within one
// entity of its ideal share.
Split split(std::span<const std::string> entities, std::span<const int> labels,
            const SplitSpec& spec);

// SHA-256 over the train/test entity ids; equal hashes mean equal splits.
std::string split_hash(const Split& split, std::span<const std::string> entities);

// Mann-Whitney AUROC with ties counted 1/2, via rank sums.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct TrainOptions {
  double step = 0.1;
  double l2 = 1e-4;
  std::size_t iterations = 500;
};

// Logistic regression on features standardised by train mean / std;
// zero-variance features get weight 0.
struct LinearModel {
  std::vector<double> mean;
  std::vector<double> scale;    // 1/std, 0 for ignored features
  std::vector<double> weights;  // in standardised space
  double bias = 0.0;

  double score(std::span<const double> features) const;
};

// Deterministic full-batch gradient descent from zero initialisation.
LinearModel fit_linear_classifier(const FeatureMatrix& matrix, std::span<const std::size_t> rows,
                                  const TrainOptions& options = {});
LinearModel fit_linear_classifier(const FeatureMatrix& train, const TrainOptions& options = {});

std::vector<double> predict(const LinearModel& model, const FeatureMatrix& matrix,
                            std::span<const std::size_t> rows);

struct EvalResult {
  std::vector<double> aurocs;  // one per repeat
  double mean_auroc = 0.0;
  double sd_auroc = 0.0;       // sample sd across repeats, 0 for one repeat
  std::string split_hash;      // combined hash of every repeat's split
};

// Repeat r splits with seed + r, fits on train and scores the test rows.
EvalResult evaluate_features(const FeatureMatrix& matrix, const SplitSpec& spec,
                             std::size_t repeats = 1, const TrainOptions& train = {});

}  // namespace tabtext
