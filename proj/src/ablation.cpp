#include "tabtext/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "tabtext/error.hpp"
#include "tabtext/tabtext_features.hpp"

namespace tabtext {

std::string_view policy_label(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::Exclude: return "Exclusion";
    case MissingPolicy::EncodeMissing: return "Is missing";
    case MissingPolicy::ZeroPad: return "Is 0";
    case MissingPolicy::KeepOriginal: return "Original";
  }
  return "Is missing";
}

std::string_view meta_label(bool include_meta) { return include_meta ? "Include" : "Does not Include"; }
std::string_view descriptive_label(bool descriptive) { return descriptive ? "Yes" : "No"; }
std::string_view combine_label(CombineMode mode) {
  return mode == CombineMode::SingleParagraph ? "Single paragraph" : "Separate embeddings";
}

std::vector<AxisMean> compute_axis_means(const std::vector<AblationRow>& rows, bool extended) {
  std::vector<AxisMean> means;
  auto add = [&](std::string axis, std::string_view value, auto&& matches) {
    AxisMean m{std::move(axis), std::string(value), 0.0, 0};
    for (const auto& row : rows) {
      if (!matches(row.config)) continue;
      m.mean += row.test_auroc;
      ++m.count;
    }
    if (m.count > 0) m.mean /= static_cast<double>(m.count);
    means.push_back(std::move(m));
  };
  for (auto policy : kAllMissingPolicies) {
    add("Missing Handling", policy_label(policy),
        [policy](const SerializationConfig& c) { return c.missing_policy == policy; });
  }
  for (bool meta : {true, false}) {
    add("Meta Info", meta_label(meta),
        [meta](const SerializationConfig& c) { return c.include_meta == meta; });
  }
  for (bool descriptive : {true, false}) {
    add("Descriptiveness", descriptive_label(descriptive),
        [descriptive](const SerializationConfig& c) { return c.descriptive == descriptive; });
  }
  if (extended) {
    for (auto mode : {CombineMode::SeparateEmbeddings, CombineMode::SingleParagraph}) {
      add("Combination", combine_label(mode),
          [mode](const SerializationConfig& c) { return c.combine_sources == mode; });
    }
  }
  return means;
}

AblationReport run_ablation(const Dataset& dataset, EmbeddingBackend& backend,
                            const AblationOptions& options) {
  if (!dataset.labels) throw EvaluationError("ablation needs a labelled dataset");
  const auto grid = representation_grid(options.extended, options.base);

  std::vector<AblationRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_point = grid.size();
  std::exception_ptr error;

  auto evaluate_point = [&](std::size_t p) {
    const auto& config = grid[p];
    const std::string where = "grid point " + std::to_string(p) + " (" + describe(config) + ")";
    try {
      TabTextOptions tab{config, options.normalize, options.embed};
      const auto features = build_tabtext_features(dataset, backend, tab);
      const auto result = evaluate_features(features, options.split, options.repeats, options.train);
      rows[p] = AblationRow{config, result.mean_auroc, result.sd_auroc, result.split_hash};
    } catch (const BackendError& e) {
      throw BackendError(where + ": " + e.detail(), e.text_index());
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError("ablate", where + ": " + e.what());
    }
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t p = next.fetch_add(1);
      if (p >= grid.size()) return;
      try {
        evaluate_point(p);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (p < error_point) {
          error_point = p;
          error = std::current_exception();
        }
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, grid.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  for (const auto& row : rows) {
    if (row.split_hash != rows.front().split_hash) {
      throw ConsistencyError("grid points were evaluated on different splits");
    }
  }

  AblationReport report;
  report.extended = options.extended;
  report.repeats = options.repeats;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AblationRow& a, const AblationRow& b) { return a.test_auroc > b.test_auroc; });
  report.rows = std::move(rows);
  report.axis_means = compute_axis_means(report.rows, options.extended);
  return report;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& body) {
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (const auto& row : body) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out = "|";
    for (std::size_t c = 0; c < cells.size(); ++c) out += " " + pad(cells[c], widths[c]) + " |";
    return out + "\n";
  };
  std::string out = line(header);
  out += "|";
  for (auto w : widths) out += std::string(w + 2, '-') + "|";
  out += "\n";
  for (const auto& row : body) out += line(row);
  return out;
}

}  // namespace

std::string format_report(const AblationReport& report) {
  const bool show_sd = report.repeats > 1;
  auto auc_text = [&](double mean, double sd) {
    return show_sd ? fixed(mean) + " +- " + fixed(sd) : fixed(mean);
  };

  std::vector<std::string> header{"Missing Handling", "Meta Info", "Descriptiveness"};
  if (report.extended) header.emplace_back("Combination");
  header.emplace_back("Test AUC");
  std::vector<std::vector<std::string>> body;
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{std::string(policy_label(row.config.missing_policy)),
                                   std::string(meta_label(row.config.include_meta)),
                                   std::string(descriptive_label(row.config.descriptive))};
    if (report.extended) cells.emplace_back(combine_label(row.config.combine_sources));
    cells.push_back(auc_text(row.test_auroc, row.sd_auroc));
    body.push_back(std::move(cells));
  }

  std::string out = "TabText representation grid: " + std::to_string(report.rows.size()) +
                    " configurations, test AUROC";
  if (show_sd) out += " (mean +- sd over " + std::to_string(report.repeats) + " splits)";
  out += "\n\n" + table(header, body);
  if (!report.rows.empty()) out += "\nsplit " + report.rows.front().split_hash + "\n";

  std::string current_axis;
  std::vector<std::vector<std::string>> axis_body;
  auto flush_axis = [&] {
    if (current_axis.empty()) return;
    out += "\n" + table({current_axis, "Test AUC"}, axis_body);
    axis_body.clear();
  };
  for (const auto& m : report.axis_means) {
    if (m.axis != current_axis) {
      flush_axis();
      current_axis = m.axis;
    }
    axis_body.push_back({m.value, fixed(m.mean)});
  }
  flush_axis();
  return out;
}

nlohmann::json report_to_json(const AblationReport& report) {
  nlohmann::json doc;
  doc["extended"] = report.extended;
  doc["repeats"] = report.repeats;
  auto rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"missing_policy", std::string(to_string(row.config.missing_policy))},
                    {"include_meta", row.config.include_meta},
                    {"descriptive", row.config.descriptive},
                    {"combine_sources", std::string(to_string(row.config.combine_sources))},
                    {"test_auroc", row.test_auroc},
                    {"sd_auroc", row.sd_auroc},
                    {"split_hash", row.split_hash}});
  }
  doc["rows"] = std::move(rows);
  auto means = nlohmann::json::array();
  for (const auto& m : report.axis_means) {
    means.push_back({{"axis", m.axis}, {"value", m.value}, {"mean", m.mean}, {"count", m.count}});
  }
  doc["axis_means"] = std::move(means);
  return doc;
}

}  // namespace tabtext
