#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "tabtext/error.hpp"
#include "tabtext/evaluation.hpp"
#include "tabtext/random.hpp"

using namespace tabtext;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("e" + std::to_string(i));
  return out;
}

std::vector<int> labels_with_positives(std::size_t n, std::size_t positives) {
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < positives; ++i) out[i * n / positives] = 1;
  return out;
}

FeatureMatrix random_matrix(std::size_t n, std::size_t cols, Rng& rng, double signal) {
  FeatureMatrix m;
  m.entity_ids = ids(n);
  for (std::size_t c = 0; c < cols; ++c) m.feature_names.push_back("f" + std::to_string(c));
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    labels[r] = rng.bernoulli(0.3) ? 1 : 0;
    for (std::size_t c = 0; c < cols; ++c) {
      m.values.push_back(rng.normal(c == 0 ? signal * labels[r] : 0.0, 1.0));
    }
  }
  if (std::count(labels.begin(), labels.end(), 1) < 5) labels[0] = labels[1] = labels[2] = labels[3] = labels[4] = 1;
  m.labels = labels;
  return m;
}

}  // namespace

TEST_CASE("stratified split of the reference cohort", "[split]") {
  const auto entities = ids(1590);
  const auto labels = labels_with_positives(1590, 121);
  const auto s = split(entities, labels, SplitSpec{0.8, 42, true});
  CHECK(s.train.size() == 1272);
  CHECK(s.test.size() == 318);
  std::size_t test_pos = 0;
  for (std::size_t i : s.test) test_pos += labels[i];
  CHECK(test_pos == 24);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  CHECK(std::is_sorted(s.test.begin(), s.test.end()));

  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 1590);
}

TEST_CASE("stratified splits keep each class near its share", "[split][property]") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(300);
    const std::size_t pos = 1 + rng.below(n - 1);
    const auto labels = labels_with_positives(n, pos);
    const double f = rng.uniform(0.05, 0.95);
    const auto s = split(ids(n), labels, SplitSpec{f, rng.below(1000), true});
    const auto expected_train = std::clamp<long long>(std::llround(f * static_cast<double>(n)), 1,
                                                      static_cast<long long>(n) - 1);
    CHECK(static_cast<long long>(s.train.size()) == expected_train);
    std::size_t train_pos = 0;
    for (std::size_t i : s.train) train_pos += labels[i];
    const double ideal = f * static_cast<double>(pos);
    const double slack = std::max(1.0, std::fabs(static_cast<double>(expected_train) - f * n) + 1.0);
    CHECK(std::fabs(static_cast<double>(train_pos) - ideal) <= slack);
  }
}

TEST_CASE("split size clamping and validation", "[split]") {
  const auto e = ids(3);
  const std::vector<int> labels = {1, 0, 0};
  CHECK(split(e, labels, SplitSpec{0.01, 1, false}).train.size() == 1);
  CHECK(split(e, labels, SplitSpec{0.99, 1, false}).train.size() == 2);
  CHECK_THROWS_AS(split(e, labels, SplitSpec{0.0, 1, false}), EvaluationError);
  CHECK_THROWS_AS(split(e, labels, SplitSpec{1.0, 1, false}), EvaluationError);
  CHECK_THROWS_AS(split(ids(1), std::vector<int>{1}, SplitSpec{}), EvaluationError);
  CHECK_THROWS_AS(split(e, std::vector<int>{1, 1, 1}, SplitSpec{0.5, 1, true}), EvaluationError);
  CHECK_THROWS_AS(split(e, std::vector<int>{1, 1}, SplitSpec{0.5, 1, true}), EvaluationError);
}

TEST_CASE("splits are deterministic per seed", "[split]") {
  const auto e = ids(100);
  const auto labels = labels_with_positives(100, 20);
  const auto a = split(e, labels, SplitSpec{0.8, 5, true});
  const auto b = split(e, labels, SplitSpec{0.8, 5, true});
  const auto c = split(e, labels, SplitSpec{0.8, 6, true});
  CHECK(a.train == b.train);
  CHECK(split_hash(a, e) == split_hash(b, e));
  CHECK(split_hash(a, e) != split_hash(c, e));
  CHECK(split_hash(a, e).size() == 64);
}

TEST_CASE("auroc edge cases", "[auroc]") {
  CHECK(auroc(std::vector<double>{1, 2}, std::vector<int>{0, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{2, 1}, std::vector<int>{0, 1}) == 0.0);
  CHECK(auroc(std::vector<double>{5, 5, 5}, std::vector<int>{0, 1, 1}) == 0.5);
  CHECK(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
  CHECK_THROWS_AS(auroc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), EvaluationError);
  CHECK_THROWS_AS(auroc(std::vector<double>{1, 2}, std::vector<int>{0, 2}), EvaluationError);
  CHECK_THROWS_AS(auroc(std::vector<double>{1}, std::vector<int>{0, 1}), EvaluationError);
  CHECK_THROWS_AS(auroc(std::vector<double>{1, std::nan("")}, std::vector<int>{0, 1}), EvaluationError);
}

TEST_CASE("auroc agrees with the pairwise oracle", "[auroc][property]") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(80);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.between(0, 9));
      labels[i] = i < 2 ? static_cast<int>(i) : (rng.bernoulli(0.5) ? 1 : 0);
    }
    CHECK(auroc(scores, labels) == Catch::Approx(oracle::pairwise_auroc(scores, labels)).margin(1e-12));
  }
}

TEST_CASE("classifier separates an informative feature", "[classifier]") {
  Rng rng(3);
  const auto m = random_matrix(400, 4, rng, 3.0);
  std::vector<std::size_t> rows(m.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto model = fit_linear_classifier(m, rows);
  CHECK(model.weights.size() == 4);
  CHECK(model.weights[0] > 0.0);
  for (std::size_t c = 1; c < 4; ++c) CHECK(std::fabs(model.weights[c]) < model.weights[0]);
  CHECK(auroc(predict(model, m, rows), *m.labels) > 0.9);
}

TEST_CASE("constant features get zero weight", "[classifier]") {
  FeatureMatrix m;
  m.entity_ids = ids(4);
  m.feature_names = {"constant", "signal"};
  m.values = {7, 0, 7, 1, 7, 0, 7, 1};
  m.labels = std::vector<int>{0, 1, 0, 1};
  const auto model = fit_linear_classifier(m);
  CHECK(model.weights[0] == 0.0);
  CHECK(model.scale[0] == 0.0);
  CHECK(model.weights[1] > 0.0);
}

TEST_CASE("classifier input validation", "[classifier]") {
  FeatureMatrix m;
  m.entity_ids = ids(2);
  m.feature_names = {"x"};
  m.values = {0, 1};
  CHECK_THROWS_AS(fit_linear_classifier(m), EvaluationError);
  m.labels = std::vector<int>{1, 1};
  CHECK_THROWS_AS(fit_linear_classifier(m), EvaluationError);
  CHECK_THROWS_AS(fit_linear_classifier(m, std::vector<std::size_t>{}), EvaluationError);
}

TEST_CASE("null features score near chance", "[evaluation]") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const auto m = random_matrix(300, 8, rng, 0.0);
    total += evaluate_features(m, SplitSpec{0.8, seed, true}).mean_auroc;
  }
  const double mean = total / 20.0;
  CHECK(mean >= 0.35);
  CHECK(mean <= 0.65);
}

TEST_CASE("evaluate_features repeats", "[evaluation]") {
  Rng rng(8);
  const auto m = random_matrix(200, 3, rng, 1.5);
  const auto one = evaluate_features(m, SplitSpec{0.8, 11, true}, 1);
  const auto three = evaluate_features(m, SplitSpec{0.8, 11, true}, 3);
  REQUIRE(three.aurocs.size() == 3);
  CHECK(three.aurocs[0] == one.aurocs[0]);
  CHECK(one.sd_auroc == 0.0);
  CHECK(one.split_hash.size() == 64);
  CHECK(three.split_hash != one.split_hash);
  const double mean = (three.aurocs[0] + three.aurocs[1] + three.aurocs[2]) / 3.0;
  CHECK(three.mean_auroc == Catch::Approx(mean));
  CHECK(three.sd_auroc > 0.0);

  const auto again = evaluate_features(m, SplitSpec{0.8, 11, true}, 3);
  CHECK(again.aurocs == three.aurocs);
  CHECK(again.split_hash == three.split_hash);

  FeatureMatrix unlabeled = m;
  unlabeled.labels.reset();
  CHECK_THROWS_AS(evaluate_features(unlabeled, SplitSpec{}), EvaluationError);
  CHECK_THROWS_AS(evaluate_features(m, SplitSpec{}, 0), EvaluationError);
}
