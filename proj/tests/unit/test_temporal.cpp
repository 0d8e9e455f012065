#include <catch_amalgamated.hpp>

#include <algorithm>

#include "tabtext/error.hpp"
#include "tabtext/random.hpp"
#include "tabtext/temporal.hpp"

using namespace tabtext;

namespace {

Embedding vec(std::vector<double> v) { return Embedding(std::move(v)); }

RowEmbedding row(std::optional<double> t, std::vector<double> v) { return {t, vec(std::move(v))}; }

}  // namespace

TEST_CASE("timestamp-weighted mean", "[temporal]") {
  const std::vector<TimedEmbedding> series = {{1.0, vec({1, 0})}, {3.0, vec({0, 1})}};
  CHECK(aggregate_timed(series, true).values == std::vector<double>{0.25, 0.75});
  CHECK(aggregate_timed(series, false).values == std::vector<double>{1.0, 3.0});
}

TEST_CASE("a single row is returned unchanged when normalized", "[temporal]") {
  const std::vector<TimedEmbedding> series = {{7.5, vec({0.1, -0.2, 0.3})}};
  CHECK(aggregate_timed(series, true).values == std::vector<double>{0.1, -0.2, 0.3});
}

TEST_CASE("zero weights", "[temporal]") {
  const std::vector<TimedEmbedding> all_zero = {{0.0, vec({2, 0})}, {0.0, vec({0, 4})}};
  CHECK(aggregate_timed(all_zero, true).values == std::vector<double>{1, 2});
  CHECK(aggregate_timed(all_zero, false).values == std::vector<double>{0, 0});

  // A zero timestamp among positive ones contributes nothing.
  const std::vector<TimedEmbedding> mixed = {{0.0, vec({100, 100})}, {2.0, vec({1, 3})}};
  CHECK(aggregate_timed(mixed, true).values == std::vector<double>{1, 3});
}

TEST_CASE("invalid series", "[temporal]") {
  CHECK_THROWS_AS(aggregate_timed(std::vector<TimedEmbedding>{}), AggregationError);
  CHECK_THROWS_AS(aggregate_timed(std::vector<TimedEmbedding>{{-1.0, vec({1})}}), AggregationError);
  CHECK_THROWS_AS(aggregate_timed(std::vector<TimedEmbedding>{{std::nan(""), vec({1})}}), AggregationError);
  CHECK_THROWS_AS(aggregate_timed(std::vector<TimedEmbedding>{{1.0, vec({1})}, {2.0, vec({1, 2})}}),
                  AggregationError);
}

TEST_CASE("result does not depend on row order", "[temporal][property]") {
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.below(12);
    const std::size_t dim = 1 + rng.below(6);
    std::vector<TimedEmbedding> series;
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.normal(0.0, 1.0);
      // Coarse timestamps so ties occur.
      series.push_back({static_cast<double>(rng.below(4)), vec(v)});
    }
    const auto reference = aggregate_timed(series, true);
    const auto raw = aggregate_timed(series, false);
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      rng.shuffle(std::span(series));
      CHECK(aggregate_timed(series, true) == reference);
      CHECK(aggregate_timed(series, false) == raw);
    }
  }
}

TEST_CASE("normalized output is invariant to timestamp scale", "[temporal][property]") {
  Rng rng(405);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TimedEmbedding> series, scaled;
    for (int i = 0; i < 5; ++i) {
      const double t = static_cast<double>(1 + rng.below(100));
      std::vector<double> v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      series.push_back({t, vec(v)});
      scaled.push_back({t * 8.0, vec(v)});
    }
    const auto a = aggregate_timed(series, true);
    const auto b = aggregate_timed(scaled, true);
    for (std::size_t d = 0; d < 2; ++d) CHECK(a.values[d] == Catch::Approx(b.values[d]).margin(1e-12));
  }
}

TEST_CASE("aggregate_entity with separate embeddings", "[temporal]") {
  std::vector<SourceContribution> sources(3);
  sources[0] = {"demographics", false, 2, {row(std::nullopt, {1, 2})}};
  sources[1] = {"vitals", true, 2, {row(1.0, {1, 0}), row(3.0, {0, 1})}};
  sources[2] = {"notes", false, 3, {}};
  const auto out = aggregate_entity("p1", sources, CombineMode::SeparateEmbeddings);
  CHECK(out.values == std::vector<double>{1, 2, 0.25, 0.75, 0, 0, 0});

  const auto raw = aggregate_entity("p1", sources, CombineMode::SeparateEmbeddings, false);
  CHECK(raw.values == std::vector<double>{1, 2, 1, 3, 0, 0, 0});
}

TEST_CASE("aggregate_entity with a single paragraph averages present sources", "[temporal]") {
  std::vector<SourceContribution> sources(3);
  sources[0] = {"demographics", false, 2, {row(std::nullopt, {1, 2})}};
  sources[1] = {"vitals", true, 2, {row(2.0, {3, 0})}};
  sources[2] = {"notes", false, 2, {}};
  CHECK(aggregate_entity("p1", sources, CombineMode::SingleParagraph).values == std::vector<double>{2, 1});

  sources[1].rows.clear();
  CHECK(aggregate_entity("p1", sources, CombineMode::SingleParagraph).values == std::vector<double>{1, 2});
  sources[0].rows.clear();
  CHECK(aggregate_entity("p1", sources, CombineMode::SingleParagraph).values == std::vector<double>{0, 0});
}

TEST_CASE("aggregate_entity errors", "[temporal]") {
  SECTION("two rows in a static source") {
    std::vector<SourceContribution> sources = {
        {"demographics", false, 1, {row(std::nullopt, {1}), row(std::nullopt, {2})}}};
    try {
      aggregate_entity("p7", sources, CombineMode::SeparateEmbeddings);
      FAIL("expected AmbiguityError");
    } catch (const AmbiguityError& e) {
      const std::string what = e.what();
      CHECK(what.find("p7") != std::string::npos);
      CHECK(what.find("demographics") != std::string::npos);
    }
  }
  SECTION("time-series row without timestamp") {
    std::vector<SourceContribution> sources = {{"vitals", true, 1, {row(std::nullopt, {1})}}};
    CHECK_THROWS_AS(aggregate_entity("p1", sources, CombineMode::SeparateEmbeddings), AggregationError);
  }
  SECTION("negative timestamp names the entity and source") {
    std::vector<SourceContribution> sources = {{"vitals", true, 1, {row(-2.0, {1})}}};
    try {
      aggregate_entity("p3", sources, CombineMode::SeparateEmbeddings);
      FAIL("expected AggregationError");
    } catch (const AggregationError& e) {
      const std::string what = e.what();
      CHECK(what.find("p3") != std::string::npos);
      CHECK(what.find("vitals") != std::string::npos);
    }
  }
  SECTION("single paragraph with mismatched dims") {
    std::vector<SourceContribution> sources = {{"a", false, 1, {row(std::nullopt, {1})}},
                                               {"b", false, 2, {row(std::nullopt, {1, 2})}}};
    CHECK_THROWS_AS(aggregate_entity("p1", sources, CombineMode::SingleParagraph), AggregationError);
  }
}
