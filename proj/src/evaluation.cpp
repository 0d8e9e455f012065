#include "tabtext/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabtext/digest.hpp"
#include "tabtext/error.hpp"
#include "tabtext/random.hpp"

namespace tabtext {

Split split(std::span<const std::string> entities, std::span<const int> labels,
            const SplitSpec& spec) {
  const std::size_t n = entities.size();
  if (n < 2) throw EvaluationError("split needs at least 2 entities");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw EvaluationError("train_fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(std::clamp<long long>(
      std::llround(spec.train_fraction * static_cast<double>(n)), 1, static_cast<long long>(n) - 1));

  Rng rng(spec.seed);
  std::vector<bool> in_train(n, false);
  if (spec.stratified) {
    if (labels.size() != n) throw EvaluationError("stratified split needs one label per entity");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) {
      throw EvaluationError("stratified split requested but only one class is present");
    }
    rng.shuffle(std::span(pos));
    rng.shuffle(std::span(neg));
    auto pos_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(pos.size())));
    pos_train = std::min(pos_train, n_train);
    if (n_train - pos_train > neg.size()) pos_train = n_train - neg.size();
    const std::size_t neg_train = n_train - pos_train;
    for (std::size_t k = 0; k < pos_train; ++k) in_train[pos[k]] = true;
    for (std::size_t k = 0; k < neg_train; ++k) in_train[neg[k]] = true;
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;
  }

  Split out;
  out.train.reserve(n_train);
  out.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.train : out.test).push_back(i);
  return out;
}

std::string split_hash(const Split& split, std::span<const std::string> entities) {
  std::string buffer = "train\n";
  for (std::size_t i : split.train) buffer += entities[i] + "\n";
  buffer += "test\n";
  for (std::size_t i : split.test) buffer += entities[i] + "\n";
  return sha256_hex(buffer);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw EvaluationError("auroc: scores and labels differ in size");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw EvaluationError("auroc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw EvaluationError("auroc: NaN score");
    n_pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw EvaluationError("auroc needs both positive and negative labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled to stay integral.
  long double doubled_rank_sum = 0.0L;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const auto doubled_rank = static_cast<long double>(i + 1 + j + 1);  // 2 * average rank
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) doubled_rank_sum += doubled_rank;
    }
    i = j + 1;
  }
  const long double p = static_cast<long double>(n_pos);
  const long double u = doubled_rank_sum / 2.0L - p * (p + 1.0L) / 2.0L;
  return static_cast<double>(u / (p * static_cast<long double>(n_neg)));
}

double LinearModel::score(std::span<const double> features) const {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] != 0.0) z += weights[j] * (features[j] - mean[j]) * scale[j];
  }
  return z;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LinearModel fit_linear_classifier(const FeatureMatrix& matrix, std::span<const std::size_t> rows,
                                  const TrainOptions& options) {
  if (!matrix.labels) throw EvaluationError("classifier training needs labels");
  if (rows.empty()) throw EvaluationError("classifier training needs at least one row");
  const auto& labels = *matrix.labels;
  const std::size_t n = rows.size();
  const std::size_t f = matrix.cols();

  std::size_t n_pos = 0;
  for (std::size_t r : rows) n_pos += static_cast<std::size_t>(labels[r] == 1);
  if (n_pos == 0 || n_pos == n) throw EvaluationError("training labels are all identical");

  LinearModel model;
  model.mean.assign(f, 0.0);
  model.scale.assign(f, 0.0);
  model.weights.assign(f, 0.0);

  for (std::size_t r : rows) {
    const auto x = matrix.row(r);
    for (std::size_t j = 0; j < f; ++j) model.mean[j] += x[j];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);
  std::vector<double> var(f, 0.0);
  for (std::size_t r : rows) {
    const auto x = matrix.row(r);
    for (std::size_t j = 0; j < f; ++j) {
      const double d = x[j] - model.mean[j];
      var[j] += d * d;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < f; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    if (sd > 0.0 && std::isfinite(sd)) {
      model.scale[j] = 1.0 / sd;
      active.push_back(j);
    }
  }
  const std::size_t a = active.size();

  // Standardised design matrix restricted to the active features.
  std::vector<double> z(n * a);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = matrix.row(rows[i]);
    for (std::size_t k = 0; k < a; ++k) {
      const std::size_t j = active[k];
      z[i * a + k] = (x[j] - model.mean[j]) * model.scale[j];
    }
    y[i] = labels[rows[i]] == 1 ? 1.0 : 0.0;
  }

  std::vector<double> w(a, 0.0);
  std::vector<double> grad(a);
  std::vector<double> residual(n);
  double b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* zi = z.data() + i * a;
      double logit = b;
      for (std::size_t k = 0; k < a; ++k) logit += zi[k] * w[k];
      residual[i] = sigmoid(logit) - y[i];
      grad_b += residual[i];
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* zi = z.data() + i * a;
      const double r = residual[i];
      for (std::size_t k = 0; k < a; ++k) grad[k] += zi[k] * r;
    }
    for (std::size_t k = 0; k < a; ++k) {
      w[k] -= options.step * (grad[k] * inv_n + options.l2 * w[k]);
    }
    b -= options.step * grad_b * inv_n;
  }

  for (std::size_t k = 0; k < a; ++k) model.weights[active[k]] = w[k];
  model.bias = b;
  return model;
}

LinearModel fit_linear_classifier(const FeatureMatrix& train, const TrainOptions& options) {
  std::vector<std::size_t> rows(train.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_linear_classifier(train, rows, options);
}

std::vector<double> predict(const LinearModel& model, const FeatureMatrix& matrix,
                            std::span<const std::size_t> rows) {
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (std::size_t r : rows) scores.push_back(model.score(matrix.row(r)));
  return scores;
}

EvalResult evaluate_features(const FeatureMatrix& matrix, const SplitSpec& spec,
                             std::size_t repeats, const TrainOptions& train) {
  if (!matrix.labels) throw EvaluationError("evaluation needs labels");
  if (repeats == 0) throw EvaluationError("repeats must be at least 1");
  const auto& labels = *matrix.labels;

  EvalResult result;
  std::string hashes;
  for (std::size_t r = 0; r < repeats; ++r) {
    SplitSpec s = spec;
    s.seed = spec.seed + r;
    const auto parts = split(matrix.entity_ids, labels, s);
    const auto model = fit_linear_classifier(matrix, parts.train, train);
    const auto scores = predict(model, matrix, parts.test);
    std::vector<int> test_labels;
    test_labels.reserve(parts.test.size());
    for (std::size_t i : parts.test) test_labels.push_back(labels[i]);
    result.aurocs.push_back(auroc(scores, test_labels));
    const auto h = split_hash(parts, matrix.entity_ids);
    hashes += h + "\n";
    if (repeats == 1) result.split_hash = h;
  }
  if (repeats > 1) result.split_hash = sha256_hex(hashes);

  const double k = static_cast<double>(repeats);
  result.mean_auroc = std::accumulate(result.aurocs.begin(), result.aurocs.end(), 0.0) / k;
  if (repeats > 1) {
    double ss = 0.0;
    for (double v : result.aurocs) ss += (v - result.mean_auroc) * (v - result.mean_auroc);
    result.sd_auroc = std::sqrt(ss / (k - 1.0));
  }
  return result;
}

}  // namespace tabtext
