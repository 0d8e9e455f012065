#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tabtext/backends.hpp"
#include "tabtext/baseline.hpp"
#include "tabtext/csv.hpp"
#include "tabtext/error.hpp"
#include "tabtext/evaluation.hpp"
#include "tabtext/pipeline.hpp"
#include "tabtext/run_config.hpp"
#include "tabtext/synthetic_corpus.hpp"
#include "tabtext/temporal.hpp"
#include "tabtext/text_util.hpp"

namespace {

using namespace tabtext;

enum ExitCode { kOk = 0, kValidation = 1, kStage = 2, kBackend = 3 };

// Flags shared by every config-driven subcommand; unset flags keep the
// config file's value.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> workers;
  std::optional<std::string> output;
  std::optional<std::string> backend;
  std::optional<std::size_t> dim;
  std::optional<std::string> cache;
  std::optional<std::string> url;
  std::optional<std::string> model_dir;
  std::optional<std::string> missing_policy;
  std::optional<bool> meta;
  std::optional<bool> descriptive;
  std::optional<std::string> combine;
  std::optional<bool> normalize;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "Run config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Split seed");
  cmd->add_option("--train-fraction", o.train_fraction, "Share of entities used for training");
  cmd->add_option("--repeats", o.repeats, "Number of repeated splits");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("-o,--output", o.output, "Output directory or file");
  cmd->add_option("--backend", o.backend, "Embedding backend: hashing, remote or local");
  cmd->add_option("--dim", o.dim, "Embedding dimension");
  cmd->add_option("--cache", o.cache, "Embedding cache file");
  cmd->add_option("--url", o.url, "Remote embedding endpoint");
  cmd->add_option("--model-dir", o.model_dir, "Local model directory");
  cmd->add_option("--missing-policy", o.missing_policy,
                  "Exclude, EncodeMissing, ZeroPad or KeepOriginal");
  cmd->add_flag("--meta,!--no-meta", o.meta, "Prefix sentences with table title and description");
  cmd->add_flag("--descriptive,!--terse", o.descriptive, "Use the columns' descriptive templates");
  cmd->add_option("--combine", o.combine, "SeparateEmbeddings or SingleParagraph");
  cmd->add_flag("--normalize,!--raw-sum", o.normalize, "Normalise the timestamp-weighted sum");
}

RunConfig load_with_overrides(const Overrides& o) {
  RunConfig config = load_run_config(o.config);
  if (o.seed) config.evaluation.split.seed = *o.seed;
  if (o.train_fraction) config.evaluation.split.train_fraction = *o.train_fraction;
  if (o.repeats) config.evaluation.repeats = *o.repeats;
  if (o.workers) config.workers = *o.workers;
  if (o.output) config.output = std::filesystem::absolute(*o.output).string();
  if (o.backend) config.embedding.backend = *o.backend;
  if (o.dim) config.embedding.dim = *o.dim;
  if (o.cache) config.embedding.cache = std::filesystem::absolute(*o.cache).string();
  if (o.url) config.embedding.url = *o.url;
  if (o.model_dir) config.embedding.model_dir = std::filesystem::absolute(*o.model_dir).string();
  if (o.missing_policy) config.serialization.missing_policy = parse_missing_policy(*o.missing_policy);
  if (o.meta) config.serialization.include_meta = *o.meta;
  if (o.descriptive) config.serialization.descriptive = *o.descriptive;
  if (o.combine) config.serialization.combine_sources = parse_combine_mode(*o.combine);
  if (o.normalize) config.temporal.normalize = *o.normalize;
  config.validate();
  return config;
}

void emit(const std::optional<std::string>& path, std::string_view contents) {
  if (path && *path != "-") {
    write_file(*path, contents);
  } else {
    std::cout << contents;
  }
}

std::string input_text(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  return read_file(path);
}

std::string format_timestamp(const std::optional<double>& ts) {
  return ts ? format_double(*ts) : std::string();
}

const Source& pick_source(const Dataset& dataset, const std::string& name) {
  if (name.empty()) {
    if (dataset.sources.size() == 1) return dataset.sources.front();
    throw ValidationError("the config lists several sources; choose one with --source");
  }
  for (const auto& source : dataset.sources) {
    if (source.name() == name) return source;
  }
  throw ValidationError("no source named '" + name + "'");
}

// One line per row: entity_id TAB sentence.
int cmd_serialize(const Overrides& o, const std::string& source_name) {
  const RunConfig config = load_with_overrides(o);
  const Dataset dataset = load_dataset(config);
  const Source& source = pick_source(dataset, source_name);
  std::string out;
  for (const auto& row : source.rows) {
    out += row.entity_id + "\t" + serialize_row(source.schema, row, config.serialization) + "\n";
  }
  emit(o.output, out);
  return kOk;
}

// Per-row embeddings of one source: entity_id,timestamp,e0..e{D-1}. The
// timestamp field is empty for static sources.
int cmd_embed(const Overrides& o, const std::string& source_name) {
  const RunConfig config = load_with_overrides(o);
  const Dataset dataset = load_dataset(config);
  const Source& source = pick_source(dataset, source_name);
  std::vector<std::string> texts;
  texts.reserve(source.rows.size());
  for (const auto& row : source.rows) texts.push_back(serialize_row(source.schema, row, config.serialization));

  BackendSettings settings = config.embedding;
  if (!settings.cache.empty()) settings.cache = config.resolve(settings.cache).string();
  if (!settings.model_dir.empty()) settings.model_dir = config.resolve(settings.model_dir).string();
  auto backend = make_backend(settings);
  const auto start = std::chrono::steady_clock::now();
  const auto embeddings = embed_texts(texts, *backend, {settings.batch_size, config.workers});
  log_stage("embed", texts.size(), std::chrono::steady_clock::now() - start, "backend=" + backend->id());

  std::vector<std::string> header{"entity_id", "timestamp"};
  for (std::size_t d = 0; d < backend->dim(); ++d) header.push_back("e" + std::to_string(d));
  std::string out = csv::format_record(header);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& row = source.rows[i];
    std::vector<std::string> line{row.entity_id, row.timestamp ? format_double(*row.timestamp) : ""};
    for (double v : embeddings[i].values) line.push_back(format_double(v));
    out += csv::format_record(line);
  }
  emit(o.output, out);
  return kOk;
}

// Per-row embedding files (one per source, in the given order) -> one vector
// per entity in feature-matrix format. A file whose rows carry timestamps is
// aggregated as a time series; otherwise each entity's single row passes through.
int cmd_aggregate(const std::vector<std::string>& inputs, const std::optional<std::string>& output,
                  const std::string& combine, bool raw_sum) {
  const CombineMode mode = parse_combine_mode(combine);
  std::vector<std::string> entities;
  std::map<std::string, std::size_t> entity_pos;
  std::vector<std::string> source_names;
  std::vector<bool> timed;
  std::size_t dim = 0;
  // [entity][source] -> rows
  std::vector<std::vector<std::vector<RowEmbedding>>> rows;

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto records = csv::read(input_text(inputs[s]));
    if (records.empty() || records.front().fields.size() < 3) {
      throw ValidationError(inputs[s] + ": expected the columns entity_id,timestamp,e0...");
    }
    const std::size_t file_dim = records.front().fields.size() - 2;
    if (s == 0) dim = file_dim;
    if (file_dim != dim) {
      throw ValidationError(inputs[s] + ": dimension " + std::to_string(file_dim) + " differs from " +
                            std::to_string(dim));
    }
    source_names.push_back(std::filesystem::path(inputs[s]).stem().string());
    timed.push_back(records.size() > 1 && !records[1].fields[1].empty());
    for (auto& per_entity : rows) per_entity.emplace_back();
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.fields.size() != file_dim + 2) throw ParseError(r.line, inputs[s] + ": wrong field count");
      if (r.fields[1].empty() == timed.back()) {
        throw ParseError(r.line, inputs[s] + ": mixes timestamped and untimestamped rows");
      }
      if (!entity_pos.contains(r.fields[0])) {
        entity_pos[r.fields[0]] = entities.size();
        entities.push_back(r.fields[0]);
        rows.emplace_back(s + 1);
      }
      RowEmbedding row;
      if (timed.back()) {
        row.timestamp = parse_number(r.fields[1]);
        if (!row.timestamp) throw ParseError(r.line, "timestamp '" + r.fields[1] + "' is not a number");
      }
      row.embedding = Embedding::zeros(file_dim);
      for (std::size_t d = 0; d < file_dim; ++d) {
        const auto v = parse_number(r.fields[d + 2]);
        if (!v) throw ParseError(r.line, "embedding value '" + r.fields[d + 2] + "' is not a number");
        row.embedding.values[d] = *v;
      }
      rows[entity_pos[r.fields[0]]][s].push_back(std::move(row));
    }
  }

  FeatureMatrix matrix;
  matrix.entity_ids = entities;
  if (mode == CombineMode::SeparateEmbeddings) {
    for (const auto& name : source_names) {
      for (std::size_t d = 0; d < dim; ++d) matrix.feature_names.push_back(name + ".emb" + std::to_string(d));
    }
  } else {
    for (std::size_t d = 0; d < dim; ++d) matrix.feature_names.push_back("paragraph.emb" + std::to_string(d));
  }
  for (std::size_t e = 0; e < entities.size(); ++e) {
    std::vector<SourceContribution> contributions;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      contributions.push_back({source_names[s], timed[s], dim, std::move(rows[e][s])});
    }
    const auto vec = aggregate_entity(entities[e], contributions, mode, !raw_sum);
    matrix.values.insert(matrix.values.end(), vec.values.begin(), vec.values.end());
  }
  emit(output, write_feature_matrix(matrix));
  return kOk;
}

int cmd_baseline(const Overrides& o, std::size_t max_categories) {
  RunConfig config = load_with_overrides(o);
  if (max_categories > 0) config.baseline.max_categories = max_categories;
  const Dataset dataset = load_dataset(config);
  const auto matrix = build_baseline_features(dataset, config.baseline);
  emit(o.output, write_feature_matrix(matrix));
  return kOk;
}

int cmd_eval(const std::string& features, const std::string& labels_path, const SplitSpec& spec,
             std::size_t repeats) {
  FeatureMatrix matrix = read_feature_matrix(read_file(features));
  if (!labels_path.empty()) {
    const auto labels = parse_labels(read_file(labels_path));
    std::map<std::string, int> by_id;
    for (std::size_t i = 0; i < labels.entities.size(); ++i) by_id[labels.entities[i]] = labels.labels[i];
    std::vector<int> aligned;
    for (const auto& id : matrix.entity_ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("entity '" + id + "' has no label");
      aligned.push_back(it->second);
    }
    matrix.labels = std::move(aligned);
  }
  if (!matrix.labels) throw ValidationError("feature matrix has no label column; pass --labels");
  const auto result = evaluate_features(matrix, spec, repeats);
  std::printf("test_auroc %.6f\n", result.mean_auroc);
  if (repeats > 1) std::printf("sd_auroc %.6f\n", result.sd_auroc);
  std::printf("split %s\n", result.split_hash.c_str());
  return kOk;
}

int cmd_ablate(const Overrides& o, bool extended) {
  const RunConfig config = load_with_overrides(o);
  run_ablation_pipeline(config, extended);
  std::cout << read_file((config.resolve(config.output) / "ablation.txt").string());
  return kOk;
}

int cmd_compare(const Overrides& o, bool evaluate) {
  const RunConfig config = load_with_overrides(o);
  const auto manifest = run_pipeline(config, PipelineOptions{evaluate});
  if (evaluate) {
    std::cout << read_file((config.resolve(config.output) / "report.txt").string());
  } else {
    std::cout << manifest.dump(2) << '\n';
  }
  return kOk;
}

int cmd_gen_corpus(const CorpusSpec& spec, const std::string& output) {
  const auto corpus = generate_corpus(spec);
  write_corpus(corpus, output);
  std::size_t positives = 0;
  for (int y : corpus.labels) positives += static_cast<std::size_t>(y);
  std::printf("wrote %zu entities (%zu positive) to %s; bayes_auroc %.4f\n", corpus.entities.size(),
              positives, output.c_str(), corpus.truth.bayes_auroc);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular records to sentence-embedding features"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress per-stage log lines");

  Overrides serialize_o, embed_o, baseline_o, ablate_o, compare_o;

  auto* serialize = app.add_subcommand("serialize", "Write one sentence per source row");
  add_config_flags(serialize, serialize_o);
  std::string serialize_source;
  serialize->add_option("--source", serialize_source, "Source table (required with several sources)");

  auto* embed = app.add_subcommand("embed", "Serialize and embed every row of one source");
  add_config_flags(embed, embed_o);
  std::string embed_source;
  embed->add_option("--source", embed_source, "Source table (required with several sources)");

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate per-row embeddings per entity");
  std::vector<std::string> aggregate_inputs;
  std::optional<std::string> aggregate_output;
  std::string combine = "SeparateEmbeddings";
  bool raw_sum = false;
  aggregate->add_option("-i,--input", aggregate_inputs, "Per-row embedding files, one per source")->required();
  aggregate->add_option("-o,--output", aggregate_output, "Feature matrix file");
  aggregate->add_option("--combine", combine, "SeparateEmbeddings or SingleParagraph");
  aggregate->add_flag("--raw-sum", raw_sum, "Timestamp-weighted sum without normalisation");

  auto* baseline = app.add_subcommand("baseline", "Traditional one-hot and summary-statistic features");
  add_config_flags(baseline, baseline_o);
  std::size_t max_categories = 0;
  baseline->add_option("--max-categories", max_categories, "Top categories kept per column");

  auto* eval = app.add_subcommand("eval", "Split, fit the linear classifier and report test AUROC");
  std::string eval_features, eval_labels;
  SplitSpec eval_spec{0.8, 42, true};
  std::size_t eval_repeats = 1;
  bool unstratified = false;
  eval->add_option("-f,--features", eval_features, "Feature matrix file")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_labels, "Labels file when the matrix has no label column")
      ->check(CLI::ExistingFile);
  eval->add_option("--seed", eval_spec.seed, "Split seed");
  eval->add_option("--train-fraction", eval_spec.train_fraction, "Share of entities used for training");
  eval->add_option("--repeats", eval_repeats, "Number of repeated splits");
  eval->add_flag("--unstratified", unstratified, "Plain random split");

  auto* ablate = app.add_subcommand("ablate", "Run the serialization ablation grid");
  add_config_flags(ablate, ablate_o);
  bool extended = false;
  ablate->add_flag("--grid-extended", extended, "Add the source-combination axis (32 points)");

  auto* compare = app.add_subcommand("compare", "Full pipeline: TabText and baseline features plus evaluation");
  add_config_flags(compare, compare_o);
  bool no_eval = false;
  compare->add_flag("--no-eval", no_eval, "Only write the feature matrices");

  auto* gen = app.add_subcommand("gen-corpus", "Write a seeded synthetic corpus");
  CorpusSpec corpus_spec;
  std::string corpus_dir;
  gen->add_option("-o,--output", corpus_dir, "Target directory")->required();
  gen->add_option("--seed", corpus_spec.seed, "Generator seed");
  gen->add_option("--entities", corpus_spec.n_entities, "Number of entities");
  gen->add_option("--positive-rate", corpus_spec.positive_rate, "Expected share of positive labels");
  gen->add_option("--missingness", corpus_spec.missingness_rate, "Background missing-cell rate");
  gen->add_option("--missing-token", corpus_spec.missing_token, "Text written for missing cells");
  gen->add_option("--risk-strength", corpus_spec.risk_strength, "Logit effect of a risk diagnosis");
  gen->add_option("--age-strength", corpus_spec.age_strength, "Logit effect of age >= 65");
  gen->add_flag("--informative-missingness", corpus_spec.informative_missingness,
                "Let lactate missingness carry label signal");
  gen->add_option("--missing-strength", corpus_spec.missing_strength, "Logit effect of lactate missing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  set_stage_logging(!quiet);

  try {
    if (*serialize) return cmd_serialize(serialize_o, serialize_source);
    if (*embed) return cmd_embed(embed_o, embed_source);
    if (*aggregate) return cmd_aggregate(aggregate_inputs, aggregate_output, combine, raw_sum);
    if (*baseline) return cmd_baseline(baseline_o, max_categories);
    if (*eval) {
      eval_spec.stratified = !unstratified;
      return cmd_eval(eval_features, eval_labels, eval_spec, eval_repeats);
    }
    if (*ablate) return cmd_ablate(ablate_o, extended);
    if (*compare) return cmd_compare(compare_o, !no_eval);
    if (*gen) return cmd_gen_corpus(corpus_spec, corpus_dir);
  } catch (const ValidationError& e) {
    std::cerr << "tabtext: invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const BackendError& e) {
    std::cerr << "tabtext: backend failure: " << e.what() << '\n';
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << "tabtext: " << e.what() << '\n';
    return kStage;
  }
  return kOk;
}
