#include <catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "tabtext/ablation.hpp"
#include "tabtext/backends.hpp"
#include "tabtext/error.hpp"
#include "tabtext/pipeline.hpp"
#include "tabtext/synthetic_corpus.hpp"

using namespace tabtext;
namespace fs = std::filesystem;

namespace {

Dataset small_dataset() {
  set_stage_logging(false);
  CorpusSpec spec;
  spec.seed = 3;
  spec.n_entities = 150;
  spec.positive_rate = 0.2;
  const fs::path dir = fs::path(TABTEXT_TEST_WORK_DIR) / "ablation_corpus";
  fs::remove_all(dir);
  write_corpus(generate_corpus(spec), dir);
  return load_dataset(load_run_config(dir / "config.json"));
}

AblationRow make_row(MissingPolicy p, bool meta, bool descriptive, double auc,
                     CombineMode mode = CombineMode::SeparateEmbeddings) {
  AblationRow row;
  row.config.missing_policy = p;
  row.config.include_meta = meta;
  row.config.descriptive = descriptive;
  row.config.combine_sources = mode;
  row.test_auroc = auc;
  return row;
}

}  // namespace

TEST_CASE("report labels", "[ablation]") {
  CHECK(policy_label(MissingPolicy::Exclude) == "Exclusion");
  CHECK(policy_label(MissingPolicy::EncodeMissing) == "Is missing");
  CHECK(policy_label(MissingPolicy::ZeroPad) == "Is 0");
  CHECK(policy_label(MissingPolicy::KeepOriginal) == "Original");
  CHECK(meta_label(true) == "Include");
  CHECK(meta_label(false) == "Does not Include");
  CHECK(descriptive_label(true) == "Yes");
  CHECK(descriptive_label(false) == "No");
  CHECK(combine_label(CombineMode::SingleParagraph) == "Single paragraph");
}

TEST_CASE("axis means over a hand-built grid", "[ablation]") {
  std::vector<AblationRow> rows;
  double auc = 0.5;
  for (auto p : {MissingPolicy::Exclude, MissingPolicy::EncodeMissing, MissingPolicy::ZeroPad,
                 MissingPolicy::KeepOriginal}) {
    for (bool meta : {true, false}) {
      for (bool d : {true, false}) {
        rows.push_back(make_row(p, meta, d, auc));
        auc += 0.01;
      }
    }
  }
  const auto means = compute_axis_means(rows, false);
  REQUIRE(means.size() == 8);
  CHECK(means[0].axis == "Missing Handling");
  CHECK(means[0].value == "Exclusion");
  CHECK(means[0].count == 4);
  CHECK(means[0].mean == Catch::Approx(0.515));
  CHECK(means[3].value == "Original");
  CHECK(means[3].mean == Catch::Approx(0.635));
  CHECK(means[4].axis == "Meta Info");
  CHECK(means[4].value == "Include");
  CHECK(means[4].count == 8);
  CHECK(means[4].mean == Catch::Approx((0.50 + 0.51 + 0.54 + 0.55 + 0.58 + 0.59 + 0.62 + 0.63) / 8));
  CHECK(means[6].axis == "Descriptiveness");
  CHECK(means[6].value == "Yes");
  CHECK(means[6].mean == Catch::Approx((0.50 + 0.52 + 0.54 + 0.56 + 0.58 + 0.60 + 0.62 + 0.64) / 8));
}

TEST_CASE("full grid on a small corpus", "[ablation][slow]") {
  const auto dataset = small_dataset();
  HashingBackend backend(64);
  AblationOptions options;
  options.split = SplitSpec{0.8, 42, true};
  const auto report = run_ablation(dataset, backend, options);

  REQUIRE(report.rows.size() == 16);
  std::set<std::string> hashes;
  std::set<std::tuple<int, bool, bool>> points;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    hashes.insert(row.split_hash);
    points.insert({static_cast<int>(row.config.missing_policy), row.config.include_meta, row.config.descriptive});
    CHECK(row.test_auroc >= 0.0);
    CHECK(row.test_auroc <= 1.0);
    if (i > 0) CHECK(report.rows[i - 1].test_auroc >= row.test_auroc);
  }
  CHECK(hashes.size() == 1);
  CHECK(points.size() == 16);

  const auto recomputed = compute_axis_means(report.rows, false);
  REQUIRE(recomputed.size() == report.axis_means.size());
  for (std::size_t i = 0; i < recomputed.size(); ++i) CHECK(recomputed[i].mean == report.axis_means[i].mean);

  const auto text = format_report(report);
  CHECK(text.find("| Missing Handling | Meta Info") != std::string::npos);
  CHECK(text.find("Test AUC") != std::string::npos);
  CHECK(text.find("split " + report.rows.front().split_hash) != std::string::npos);

  const auto doc = report_to_json(report);
  CHECK(doc["rows"].size() == 16);
  CHECK(doc["axis_means"].size() == 8);
  CHECK(doc["extended"] == false);

  SECTION("the report is reproducible and independent of the worker count") {
    AblationOptions parallel = options;
    parallel.workers = 3;
    const auto again = run_ablation(dataset, backend, parallel);
    CHECK(format_report(again) == text);
  }
}

TEST_CASE("extended grid adds the combination axis", "[ablation][slow]") {
  const auto dataset = small_dataset();
  HashingBackend backend(32);
  AblationOptions options;
  options.extended = true;
  const auto report = run_ablation(dataset, backend, options);
  CHECK(report.rows.size() == 32);
  REQUIRE(report.axis_means.size() == 10);
  CHECK(report.axis_means[8].axis == "Combination");
  CHECK(report.axis_means[8].count == 16);
  CHECK(format_report(report).find("Combination") != std::string::npos);
}

TEST_CASE("ablation needs labels", "[ablation]") {
  auto dataset = small_dataset();
  dataset.labels.reset();
  HashingBackend backend(8);
  CHECK_THROWS_AS(run_ablation(dataset, backend), EvaluationError);
}
