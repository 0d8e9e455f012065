#include "tabtext/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <set>

#include "tabtext/baseline.hpp"
#include "tabtext/digest.hpp"
#include "tabtext/error.hpp"
#include "tabtext/tabtext_features.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

namespace {

std::atomic<bool> g_stage_logging{true};

using Clock = std::chrono::steady_clock;

template <typename F>
auto run_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const ValidationError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const BackendError& e) {
    throw BackendError("stage '" + stage + "': " + e.detail(), e.text_index());
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

nlohmann::json eval_json(const EvalResult& r) {
  return {{"mean_auroc", r.mean_auroc}, {"sd_auroc", r.sd_auroc}, {"aurocs", r.aurocs},
          {"split_hash", r.split_hash}};
}

std::shared_ptr<CachingBackend> backend_for(const RunConfig& config) {
  BackendSettings settings = config.embedding;
  if (!settings.cache.empty()) settings.cache = config.resolve(settings.cache).string();
  if (!settings.model_dir.empty()) settings.model_dir = config.resolve(settings.model_dir).string();
  return run_stage("backend", [&] { return make_backend(settings); });
}

void write_output(const std::filesystem::path& dir, const std::string& name,
                  std::string_view contents, nlohmann::json& digests) {
  const auto path = dir / name;
  write_file(path.string(), contents);
  digests[name] = sha256_hex(contents);
}

}  // namespace

void set_stage_logging(bool enabled) { g_stage_logging = enabled; }

void log_stage(std::string_view stage, std::size_t items, Clock::duration wall,
               std::string_view detail) {
  if (!g_stage_logging) return;
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(wall).count();
  std::string line = "[tabtext] stage=" + std::string(stage) + " items=" + std::to_string(items) +
                     " wall_ms=" + std::to_string(ms);
  if (!detail.empty()) line += " " + std::string(detail);
  std::cerr << line << '\n';
}

Dataset load_dataset(const RunConfig& config) {
  const auto start = Clock::now();
  std::vector<Source> sources;
  std::set<std::string> names;
  std::size_t rows = 0;
  for (const auto& sc : config.sources) {
    auto schema = load_schema(config.resolve(sc.schema).string());
    if (!names.insert(schema.name).second) {
      throw ValidationError("two sources share the table name '" + schema.name + "'");
    }
    auto parsed = run_stage("parse", [&] {
      try {
        return parse_table(read_file(config.resolve(sc.data).string()), schema);
      } catch (const Error& e) {
        throw StageError("parse", "source '" + schema.name + "' (" + sc.data + "): " + e.what());
      }
    });
    rows += parsed.size();
    sources.push_back({std::move(schema), std::move(parsed)});
  }
  std::optional<LabelTable> labels;
  if (!config.labels.empty()) {
    labels = run_stage("parse", [&] {
      try {
        return parse_labels(read_file(config.resolve(config.labels).string()));
      } catch (const Error& e) {
        throw StageError("parse", "labels (" + config.labels + "): " + e.what());
      }
    });
  }
  auto dataset = make_dataset(std::move(sources), std::move(labels));
  log_stage("parse", rows, Clock::now() - start,
            "sources=" + std::to_string(dataset.sources.size()) +
                " entities=" + std::to_string(dataset.entities.size()));
  return dataset;
}

std::string format_comparison(const EvalResult& tabtext, const EvalResult& baseline,
                              const SerializationConfig& serialization) {
  const bool show_sd = tabtext.aurocs.size() > 1;
  auto auc = [&](const EvalResult& r) {
    return show_sd ? fixed4(r.mean_auroc) + " +- " + fixed4(r.sd_auroc) : fixed4(r.mean_auroc);
  };
  const std::string rep = describe(serialization);
  const std::string trad = "one-hot + zero imputation + series summaries";
  const std::size_t w = std::max(rep.size(), trad.size());
  auto pad = [](std::string s, std::size_t n) { return s.append(n > s.size() ? n - s.size() : 0, ' '); };
  std::string out = "Out-of-sample AUROC";
  if (show_sd) out += " (mean +- sd over " + std::to_string(tabtext.aurocs.size()) + " splits)";
  out += "\n\n";
  out += "| Pipeline    | " + pad("Representation", w) + " | Test AUC |\n";
  out += "|-------------|-" + std::string(w, '-') + "-|----------|\n";
  out += "| Traditional | " + pad(trad, w) + " | " + auc(baseline) + " |\n";
  out += "| TabText     | " + pad(rep, w) + " | " + auc(tabtext) + " |\n";
  out += "\nsplit " + tabtext.split_hash + "\n";
  return out;
}

nlohmann::json run_pipeline(const RunConfig& config, const PipelineOptions& options) {
  config.validate();
  const auto out_dir = config.resolve(config.output);
  std::filesystem::create_directories(out_dir);

  const auto dataset = load_dataset(config);
  if (options.evaluate && !dataset.labels) {
    throw ValidationError("evaluation requested but the run config has no labels file");
  }
  auto backend = backend_for(config);

  auto start = Clock::now();
  TabTextOptions tab{config.serialization, config.temporal.normalize,
                     EmbedOptions{config.embedding.batch_size, config.workers}};
  const auto tabtext = run_stage("embed", [&] { return build_tabtext_features(dataset, *backend, tab); });
  log_stage("embed", tabtext.rows(), Clock::now() - start,
            "dim=" + std::to_string(tabtext.cols()) + " cache_hits=" + std::to_string(backend->hits()) +
                " cache_misses=" + std::to_string(backend->misses()));

  start = Clock::now();
  const auto baseline = run_stage("baseline", [&] { return build_baseline_features(dataset, config.baseline); });
  log_stage("baseline", baseline.rows(), Clock::now() - start,
            "features=" + std::to_string(baseline.cols()));

  nlohmann::json digests = nlohmann::json::object();
  run_stage("write", [&] {
    write_output(out_dir, "tabtext_features.csv", write_feature_matrix(tabtext), digests);
    write_output(out_dir, "baseline_features.csv", write_feature_matrix(baseline), digests);
    return 0;
  });

  nlohmann::json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["backend_id"] = backend->id();
  manifest["entities"] = dataset.entities.size();
  manifest["tabtext_features"] = tabtext.cols();
  manifest["baseline_features"] = baseline.cols();

  if (options.evaluate) {
    start = Clock::now();
    const auto [tab_eval, base_eval] = run_stage("evaluate", [&] {
      return std::pair{evaluate_features(tabtext, config.evaluation.split, config.evaluation.repeats),
                       evaluate_features(baseline, config.evaluation.split, config.evaluation.repeats)};
    });
    log_stage("evaluate", 2 * config.evaluation.repeats, Clock::now() - start,
              "tabtext_auroc=" + fixed4(tab_eval.mean_auroc) +
                  " baseline_auroc=" + fixed4(base_eval.mean_auroc));
    run_stage("write", [&] {
      write_output(out_dir, "report.txt", format_comparison(tab_eval, base_eval, config.serialization),
                   digests);
      return 0;
    });
    manifest["split_hash"] = tab_eval.split_hash;
    manifest["results"] = {{"tabtext", eval_json(tab_eval)}, {"baseline", eval_json(base_eval)}};
  }
  manifest["outputs"] = digests;
  manifest["config"] = run_config_to_json(config);
  manifest["config"].erase("output");
  manifest["config"].erase("workers");
  manifest["config"]["embedding"].erase("cache");
  manifest["config"]["embedding"].erase("batch_size");

  run_stage("write", [&] {
    write_file((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
  });
  return manifest;
}

nlohmann::json run_ablation_pipeline(const RunConfig& config, bool extended) {
  config.validate();
  const auto out_dir = config.resolve(config.output);
  std::filesystem::create_directories(out_dir);

  const auto dataset = load_dataset(config);
  if (!dataset.labels) throw ValidationError("ablation needs a labels file in the run config");
  auto backend = backend_for(config);

  AblationOptions options;
  options.extended = extended;
  options.base = config.serialization;
  options.split = config.evaluation.split;
  options.repeats = config.evaluation.repeats;
  options.normalize = config.temporal.normalize;
  options.embed = EmbedOptions{config.embedding.batch_size, 1};
  options.workers = config.workers;

  const auto start = Clock::now();
  const auto report = run_stage("ablate", [&] { return run_ablation(dataset, *backend, options); });
  log_stage("ablate", report.rows.size(), Clock::now() - start,
            "cache_hits=" + std::to_string(backend->hits()) +
                " cache_misses=" + std::to_string(backend->misses()));

  nlohmann::json digests = nlohmann::json::object();
  run_stage("write", [&] {
    write_output(out_dir, "ablation.txt", format_report(report), digests);
    write_output(out_dir, "ablation.json", report_to_json(report).dump(2) + "\n", digests);
    return 0;
  });
  nlohmann::json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["backend_id"] = backend->id();
  manifest["grid_points"] = report.rows.size();
  manifest["split_hash"] = report.rows.empty() ? "" : report.rows.front().split_hash;
  manifest["outputs"] = digests;
  run_stage("write", [&] {
    write_file((out_dir / "ablation_manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
  });
  return manifest;
}

}  // namespace tabtext
