#include "tabtext/baseline.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "tabtext/error.hpp"

namespace tabtext {

CategoryVocabulary CategoryVocabulary::fit(std::span<const CellValue> values,
                                           std::size_t max_categories) {
  if (max_categories == 0) throw ValidationError("max_categories must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& v : values) {
    if (!v.is_missing()) ++counts[v.as_present().raw];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is ordered by value, so a stable sort on frequency keeps ties lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  CategoryVocabulary vocab;
  for (std::size_t i = 0; i < ranked.size() && i < max_categories; ++i) {
    vocab.index_.emplace(ranked[i].first, vocab.categories_.size());
    vocab.categories_.push_back(ranked[i].first);
  }
  return vocab;
}

std::vector<std::string> CategoryVocabulary::column_names() const {
  auto names = categories_;
  names.emplace_back("other");
  return names;
}

std::size_t CategoryVocabulary::column_of(const CellValue& value) const {
  if (value.is_missing()) return npos;
  const auto it = index_.find(value.as_present().raw);
  return it == index_.end() ? categories_.size() : it->second;
}

OneHotColumns encode_categorical(std::span<const CellValue> values, std::size_t max_categories) {
  const auto vocab = CategoryVocabulary::fit(values, max_categories);
  OneHotColumns out;
  out.names = vocab.column_names();
  out.columns.assign(vocab.width(), std::vector<double>(values.size(), 0.0));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto col = vocab.column_of(values[i]);
    if (col != CategoryVocabulary::npos) out.columns[col][i] = 1.0;
  }
  return out;
}

SeriesSummary summarize_series(std::span<const std::pair<double, double>> points) {
  SeriesSummary s;
  if (points.empty()) return s;
  std::vector<std::pair<double, double>> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  // Welford's update for mean and squared deviations.
  double mean = 0.0;
  double m2 = 0.0;
  double lo = sorted.front().second;
  double hi = lo;
  std::size_t n = 0;
  for (const auto& [t, x] : sorted) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  s.count = n;
  s.mean = mean;
  s.min = lo;
  s.max = hi;
  if (n >= 2) {
    s.variance = m2 / static_cast<double>(n - 1);
    s.average_change = (sorted.back().second - sorted.front().second) / static_cast<double>(n - 1);
  }
  return s;
}

namespace {

struct ColumnBlock {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // each sized to the entity count

  void add(std::string name, std::vector<double> column) {
    names.push_back(std::move(name));
    columns.push_back(std::move(column));
  }
};

std::vector<CellValue> column_cells(const Source& source, std::size_t column) {
  std::vector<CellValue> cells;
  cells.reserve(source.rows.size());
  for (const auto& row : source.rows) cells.push_back(row.cells[column]);
  return cells;
}

void add_static_source(const Dataset& dataset, std::size_t s, const BaselineOptions& options,
                       ColumnBlock& block) {
  const auto& source = dataset.sources[s];
  const auto& schema = source.schema;
  const auto grouped = dataset.rows_by_entity(s);
  const std::size_t n = dataset.entities.size();
  for (std::size_t e = 0; e < n; ++e) {
    if (grouped[e].size() > 1) throw AmbiguityError(dataset.entities[e], source.name());
  }
  auto row_of = [&](std::size_t e) -> const Row* {
    return grouped[e].empty() ? nullptr : &source.rows[grouped[e].front()];
  };

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.is_key_column(c)) continue;
    const auto& col = schema.columns[c];
    const std::string prefix = schema.name + "." + col.name + ".";
    switch (col.kind) {
      case ColumnKind::numeric: {
        std::vector<double> values(n, 0.0);
        for (std::size_t e = 0; e < n; ++e) {
          if (const Row* row = row_of(e)) values[e] = row->cells[c].number().value_or(0.0);
        }
        block.add(prefix + "value", std::move(values));
        break;
      }
      case ColumnKind::binary:
      case ColumnKind::categorical: {
        const auto cells = column_cells(source, c);
        const auto vocab = CategoryVocabulary::fit(cells, options.max_categories);
        const auto names = vocab.column_names();
        std::vector<std::vector<double>> columns(vocab.width(), std::vector<double>(n, 0.0));
        for (std::size_t e = 0; e < n; ++e) {
          const Row* row = row_of(e);
          if (!row) continue;
          const auto hit = vocab.column_of(row->cells[c]);
          if (hit != CategoryVocabulary::npos) columns[hit][e] = 1.0;
        }
        for (std::size_t k = 0; k < names.size(); ++k) block.add(prefix + names[k], std::move(columns[k]));
        break;
      }
      case ColumnKind::free_text:
      case ColumnKind::timestamp:
        break;
    }
  }
}

void add_time_series_source(const Dataset& dataset, std::size_t s, const BaselineOptions& options,
                            ColumnBlock& block) {
  const auto& source = dataset.sources[s];
  const auto& schema = source.schema;
  const auto grouped = dataset.rows_by_entity(s);
  const std::size_t n = dataset.entities.size();

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.is_key_column(c)) continue;
    const auto& col = schema.columns[c];
    const std::string prefix = schema.name + "." + col.name + ".";
    switch (col.kind) {
      case ColumnKind::numeric: {
        std::vector<std::vector<double>> stats(6, std::vector<double>(n, 0.0));
        std::vector<std::pair<double, double>> points;
        for (std::size_t e = 0; e < n; ++e) {
          points.clear();
          for (std::size_t r : grouped[e]) {
            const auto& row = source.rows[r];
            if (const auto v = row.cells[c].number()) points.emplace_back(*row.timestamp, *v);
          }
          const auto summary = summarize_series(points);
          stats[0][e] = summary.mean;
          stats[1][e] = summary.min;
          stats[2][e] = summary.max;
          stats[3][e] = summary.variance;
          stats[4][e] = summary.average_change;
          stats[5][e] = static_cast<double>(summary.count);
        }
        for (std::size_t k = 0; k < 6; ++k) block.add(prefix + kSummaryStatNames[k], std::move(stats[k]));
        break;
      }
      case ColumnKind::binary:
      case ColumnKind::categorical: {
        // Share of the entity's rows falling in each category.
        const auto cells = column_cells(source, c);
        const auto vocab = CategoryVocabulary::fit(cells, options.max_categories);
        const auto names = vocab.column_names();
        std::vector<std::vector<double>> columns(vocab.width(), std::vector<double>(n, 0.0));
        for (std::size_t e = 0; e < n; ++e) {
          if (grouped[e].empty()) continue;
          const double share = 1.0 / static_cast<double>(grouped[e].size());
          for (std::size_t r : grouped[e]) {
            const auto hit = vocab.column_of(source.rows[r].cells[c]);
            if (hit != CategoryVocabulary::npos) columns[hit][e] += share;
          }
        }
        for (std::size_t k = 0; k < names.size(); ++k) block.add(prefix + names[k], std::move(columns[k]));
        break;
      }
      case ColumnKind::free_text:
      case ColumnKind::timestamp:
        break;
    }
  }
}

}  // namespace

FeatureMatrix build_baseline_features(const Dataset& dataset, const BaselineOptions& options) {
  ColumnBlock block;
  for (std::size_t s = 0; s < dataset.sources.size(); ++s) {
    if (dataset.sources[s].schema.is_time_series()) {
      add_time_series_source(dataset, s, options, block);
    } else {
      add_static_source(dataset, s, options, block);
    }
  }

  FeatureMatrix m;
  m.entity_ids = dataset.entities;
  m.feature_names = std::move(block.names);
  m.labels = dataset.labels;
  const std::size_t n = m.entity_ids.size();
  const std::size_t f = m.feature_names.size();
  m.values.assign(n * f, 0.0);
  for (std::size_t c = 0; c < f; ++c) {
    for (std::size_t e = 0; e < n; ++e) m.values[e * f + c] = block.columns[c][e];
  }
  m.validate();
  return m;
}

}  // namespace tabtext
