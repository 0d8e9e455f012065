#include "tabtext/synthetic_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tabtext/csv.hpp"
#include "tabtext/data_model.hpp"
#include "tabtext/error.hpp"
#include "tabtext/random.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

namespace {

constexpr const char* kRiskTerms[] = {"sepsis",   "hemorrhage", "shock",  "arrest",
                                      "embolism", "infarction", "stroke", "delirium"};
constexpr const char* kBenignTerms[] = {
    "cellulitis", "gastritis",  "migraine",    "fracture",   "asthma",      "bronchitis",
    "dehydration", "anemia",    "pneumonia",   "syncope",    "pancreatitis", "colitis",
    "dermatitis", "hypertension", "diabetes",  "arthritis",  "vertigo",     "sinusitis",
    "gout",       "hernia",     "laceration",  "contusion",  "insomnia",    "eczema"};
constexpr const char* kModifiers[] = {"acute",  "chronic", "suspected", "recurrent",
                                      "mild",   "severe",  "possible",  "complicated"};
constexpr const char* kInsurance[] = {"medicare", "medicaid", "private", "self-pay", "uninsured"};
constexpr const char* kAdmission[] = {"emergency", "urgent", "elective", "transfer"};

constexpr int kMinAge = 18;
constexpr int kMaxAge = 95;
constexpr int kElderlyAge = 65;

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&items)[N]) {
  return items[rng.below(N)];
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string fmt0(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f", v);
  return buf;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Signal {
  std::string name;
  double prevalence;
  double strength;
};

std::vector<Signal> signals_of(const CorpusSpec& spec) {
  std::vector<Signal> s{
      {"risk_diagnosis", spec.risk_prevalence, spec.risk_strength},
      {"elderly", static_cast<double>(kMaxAge - kElderlyAge + 1) / (kMaxAge - kMinAge + 1),
       spec.age_strength}};
  if (spec.informative_missingness) {
    s.push_back({"lactate_missing", spec.informative_missing_rate, spec.missing_strength});
  }
  return s;
}

nlohmann::json column(const char* name, const char* kind, const char* label, const char* tpl,
                      const char* unit = nullptr) {
  nlohmann::json c{{"name", name}, {"kind", kind}};
  if (label) c["label"] = label;
  if (tpl) c["descriptive_template"] = tpl;
  if (unit) c["unit"] = unit;
  return c;
}

nlohmann::json schema_doc(const char* name, const char* title, const char* description,
                          const std::string& missing_token, nlohmann::json columns,
                          const char* time_column = nullptr) {
  nlohmann::json doc{{"name", name},
                     {"meta", {{"table_title", title}, {"description", description}}},
                     {"entity_column", "patient_id"},
                     {"delimiter", ","},
                     {"columns", std::move(columns)}};
  auto tokens = default_missing_tokens();
  if (std::find(tokens.begin(), tokens.end(), missing_token) == tokens.end()) {
    tokens.push_back(missing_token);
  }
  doc["missing_tokens"] = tokens;
  if (time_column) doc["time_column"] = time_column;
  return doc;
}

}  // namespace

void CorpusSpec::validate() const {
  auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
  };
  rate(positive_rate, "positive_rate");
  rate(missingness_rate, "missingness_rate");
  rate(risk_prevalence, "risk_prevalence");
  rate(informative_missing_rate, "informative_missing_rate");
  for (const auto& [col, r] : column_missingness) rate(r, ("missingness of " + col).c_str());
  if (n_entities == 0) throw ValidationError("n_entities must be positive");
  if (min_series_length == 0 || min_series_length > max_series_length) {
    throw ValidationError("series length range must satisfy 1 <= min <= max");
  }
  if (!std::isfinite(risk_strength) || !std::isfinite(age_strength) ||
      !std::isfinite(missing_strength)) {
    throw ValidationError("signal strengths must be finite");
  }
}

CorpusGroundTruth corpus_ground_truth(const CorpusSpec& spec) {
  spec.validate();
  const auto signals = signals_of(spec);
  CorpusGroundTruth truth;
  for (const auto& s : signals) {
    truth.signal_names.push_back(s.name);
    truth.strengths.push_back(s.strength);
  }

  const std::size_t k = signals.size();
  std::vector<SignalPattern> patterns;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    SignalPattern p;
    p.probability = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const bool on = (mask >> j) & 1U;
      p.flags.push_back(on);
      p.probability *= on ? signals[j].prevalence : 1.0 - signals[j].prevalence;
    }
    patterns.push_back(std::move(p));
  }

  auto logit_of = [&](const SignalPattern& p) {
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (p.flags[j]) z += signals[j].strength;
    }
    return z;
  };
  auto expected_rate = [&](double intercept) {
    double rate = 0.0;
    for (const auto& p : patterns) rate += p.probability * sigmoid(intercept + logit_of(p));
    return rate;
  };

  if (spec.positive_rate <= 0.0 || spec.positive_rate >= 1.0) {
    truth.intercept = spec.positive_rate <= 0.0 ? -INFINITY : INFINITY;
    for (auto& p : patterns) p.positive_probability = spec.positive_rate;
  } else {
    double lo = -60.0;
    double hi = 60.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (expected_rate(mid) < spec.positive_rate ? lo : hi) = mid;
    }
    truth.intercept = 0.5 * (lo + hi);
    for (auto& p : patterns) p.positive_probability = sigmoid(truth.intercept + logit_of(p));
  }

  double positive = 0.0;
  for (const auto& p : patterns) positive += p.probability * p.positive_probability;
  truth.expected_positive_rate = positive;

  // Population AUROC of the Bayes score P(label | flags), ties counted 1/2.
  const double negative = 1.0 - positive;
  if (positive > 0.0 && negative > 0.0) {
    double auc = 0.0;
    for (const auto& a : patterns) {
      for (const auto& b : patterns) {
        const double pair = a.probability * a.positive_probability * b.probability *
                            (1.0 - b.positive_probability);
        if (a.positive_probability > b.positive_probability) auc += pair;
        else if (a.positive_probability == b.positive_probability) auc += 0.5 * pair;
      }
    }
    truth.bayes_auroc = auc / (positive * negative);
  } else {
    truth.bayes_auroc = 0.5;
  }
  truth.patterns = std::move(patterns);
  return truth;
}

nlohmann::json corpus_spec_to_json(const CorpusSpec& spec) {
  return {{"seed", spec.seed},
          {"n_entities", spec.n_entities},
          {"positive_rate", spec.positive_rate},
          {"missingness_rate", spec.missingness_rate},
          {"column_missingness", spec.column_missingness},
          {"missing_token", spec.missing_token},
          {"risk_prevalence", spec.risk_prevalence},
          {"risk_strength", spec.risk_strength},
          {"age_strength", spec.age_strength},
          {"informative_missingness", spec.informative_missingness},
          {"informative_missing_rate", spec.informative_missing_rate},
          {"missing_strength", spec.missing_strength},
          {"min_series_length", spec.min_series_length},
          {"max_series_length", spec.max_series_length}};
}

Corpus generate_corpus(const CorpusSpec& spec) {
  Corpus corpus;
  corpus.truth = corpus_ground_truth(spec);
  const auto& truth = corpus.truth;
  const std::size_t k = truth.signal_names.size();

  Rng rng(spec.seed);
  auto missing_rate = [&](const std::string& column) {
    const auto it = spec.column_missingness.find(column);
    return it == spec.column_missingness.end() ? spec.missingness_rate : it->second;
  };
  // Draws once per call so the stream layout does not depend on the rate.
  auto maybe_missing = [&](const std::string& column, std::string value) {
    return rng.uniform() < missing_rate(column) ? spec.missing_token : value;
  };

  std::string demographics = csv::format_record({"patient_id", "age", "gender", "bmi", "smoker", "insurance"});
  std::string encounters = csv::format_record({"patient_id", "admission_type", "diagnosis"});
  std::string labs = csv::format_record(
      {"patient_id", "lactate", "creatinine", "wbc", "sodium", "potassium", "glucose"});
  std::string vitals = csv::format_record(
      {"patient_id", "hour", "heart_rate", "systolic_bp", "temperature", "spo2"});
  std::string labels = csv::format_record({"patient_id", "label"});

  std::size_t digits = std::to_string(spec.n_entities).size();
  for (std::size_t i = 0; i < spec.n_entities; ++i) {
    std::string id = std::to_string(i + 1);
    id = "P" + std::string(digits > id.size() ? digits - id.size() : 0, '0') + id;

    const auto age = rng.between(kMinAge, kMaxAge);
    const bool risk = rng.bernoulli(spec.risk_prevalence);
    const bool lactate_flag = spec.informative_missingness && rng.bernoulli(spec.informative_missing_rate);
    std::size_t mask = 0;
    if (risk) mask |= 1U;
    if (age >= kElderlyAge) mask |= 2U;
    if (k > 2 && lactate_flag) mask |= 4U;
    const double p = truth.patterns[mask].positive_probability;
    const int label = rng.bernoulli(p) ? 1 : 0;

    // demographics
    const std::string gender = rng.bernoulli(0.5) ? "female" : "male";
    const double bmi = std::clamp(rng.normal(27.0, 5.0), 15.0, 50.0);
    const std::string smoker = rng.bernoulli(0.25) ? "yes" : "no";
    const std::string insurance = pick(rng, kInsurance);
    demographics += csv::format_record({id, std::to_string(age), maybe_missing("gender", gender),
                                        maybe_missing("bmi", fmt1(bmi)),
                                        maybe_missing("smoker", smoker),
                                        maybe_missing("insurance", insurance)});

    // encounters
    std::string diagnosis;
    const auto n_modifiers = rng.below(3);
    for (std::uint64_t m = 0; m < n_modifiers; ++m) diagnosis += std::string(pick(rng, kModifiers)) + " ";
    diagnosis += risk ? pick(rng, kRiskTerms) : pick(rng, kBenignTerms);
    if (rng.bernoulli(0.4)) diagnosis += std::string(" with ") + pick(rng, kBenignTerms);
    const std::string admission = pick(rng, kAdmission);
    const double lactate = std::clamp(rng.normal(1.8, 0.8), 0.3, 15.0);
    const double creatinine = std::clamp(rng.normal(1.1, 0.4), 0.2, 12.0);
    const double wbc = std::clamp(rng.normal(9.0, 3.5), 0.5, 60.0);
    const double sodium = std::clamp(rng.normal(139.0, 4.0), 115.0, 165.0);
    const double potassium = std::clamp(rng.normal(4.2, 0.6), 2.0, 8.0);
    const double glucose = std::clamp(rng.normal(125.0, 40.0), 40.0, 600.0);
    std::string lactate_text;
    if (spec.informative_missingness) {
      lactate_text = lactate_flag ? spec.missing_token : fmt1(lactate);
    } else {
      lactate_text = maybe_missing("lactate", fmt1(lactate));
    }
    encounters += csv::format_record({id, maybe_missing("admission_type", admission), diagnosis});
    labs += csv::format_record(
        {id, lactate_text, maybe_missing("creatinine", fmt1(creatinine)), maybe_missing("wbc", fmt1(wbc)),
         maybe_missing("sodium", fmt0(sodium)), maybe_missing("potassium", fmt1(potassium)),
         maybe_missing("glucose", fmt0(glucose))});

    // vitals
    const auto length = static_cast<std::size_t>(rng.between(
        static_cast<std::int64_t>(spec.min_series_length), static_cast<std::int64_t>(spec.max_series_length)));
    double hour = rng.uniform(0.5, 6.0);
    for (std::size_t r = 0; r < length; ++r) {
      if (r > 0) hour += rng.uniform(1.0, 8.0);
      const double hr = std::clamp(rng.normal(85.0, 15.0), 35.0, 190.0);
      const double sbp = std::clamp(rng.normal(120.0, 18.0), 60.0, 230.0);
      const double temp = std::clamp(rng.normal(37.0, 0.6), 34.0, 41.5);
      const double spo2 = std::clamp(rng.normal(96.0, 2.0), 70.0, 100.0);
      vitals += csv::format_record({id, fmt1(hour), maybe_missing("heart_rate", fmt0(hr)),
                                    maybe_missing("systolic_bp", fmt0(sbp)),
                                    maybe_missing("temperature", fmt1(temp)),
                                    maybe_missing("spo2", fmt0(spo2))});
    }

    labels += csv::format_record({id, std::to_string(label)});
    corpus.entities.push_back(id);
    corpus.labels.push_back(label);
    corpus.oracle_scores.push_back(p);
  }

  const auto& token = spec.missing_token;
  const auto demographics_schema = schema_doc(
      "demographics", "Demographics", "patient background at admission", token,
      {column("patient_id", "categorical", nullptr, nullptr),
       column("age", "numeric", "age", "The patient is {value} years old", "years"),
       column("gender", "binary", "gender", "The patient is {value}"),
       column("bmi", "numeric", "body mass index", "The body mass index is {value}"),
       column("smoker", "binary", "smoker", "Smoker: {value}"),
       column("insurance", "categorical", "insurance", "The patient is covered by {value} insurance")});
  const auto encounters_schema = schema_doc(
      "encounters", "Encounters", "reason for the admission", token,
      {column("patient_id", "categorical", nullptr, nullptr),
       column("admission_type", "categorical", "admission type", "The admission was {value}"),
       column("diagnosis", "free_text", "diagnosis", "The patient was diagnosed with {value}")});
  const auto labs_schema = schema_doc(
      "labs", "Laboratory results", "blood tests drawn at admission", token,
      {column("patient_id", "categorical", nullptr, nullptr),
       column("lactate", "numeric", "lactate", "Serum lactate was {value} mmol/L"),
       column("creatinine", "numeric", "creatinine", "Serum creatinine was {value} mg/dL"),
       column("wbc", "numeric", "white cell count", "The white cell count was {value} x10^9/L"),
       column("sodium", "numeric", "sodium", "Serum sodium was {value} mmol/L"),
       column("potassium", "numeric", "potassium", "Serum potassium was {value} mmol/L"),
       column("glucose", "numeric", "glucose", "Blood glucose was {value} mg/dL")});
  const auto vitals_schema = schema_doc(
      "vitals", "Vital signs", "bedside measurements during the stay", token,
      {column("patient_id", "categorical", nullptr, nullptr),
       column("hour", "timestamp", "hour", nullptr, nullptr),
       column("heart_rate", "numeric", "heart rate", "The heart rate was {value} beats per minute", "bpm"),
       column("systolic_bp", "numeric", "systolic blood pressure", "Systolic blood pressure was {value} mmHg", "mmHg"),
       column("temperature", "numeric", "temperature", "Body temperature was {value} degrees Celsius", "C"),
       column("spo2", "numeric", "oxygen saturation", "Oxygen saturation was {value} percent", "%")},
      "hour");

  nlohmann::json config{
      {"sources",
       {{{"data", "demographics.csv"}, {"schema", "demographics.schema.json"}},
        {{"data", "encounters.csv"}, {"schema", "encounters.schema.json"}},
        {{"data", "labs.csv"}, {"schema", "labs.schema.json"}},
        {{"data", "vitals.csv"}, {"schema", "vitals.schema.json"}}}},
      {"labels", "labels.csv"},
      {"serialization",
       {{"missing_policy", "EncodeMissing"},
        {"include_meta", true},
        {"descriptive", false},
        {"combine_sources", "SeparateEmbeddings"}}},
      {"embedding",
       {{"backend", "hashing"}, {"dim", 768}, {"max_chars", 510}, {"cache", "cache/embeddings.bin"},
        {"url", ""}, {"model_dir", ""}, {"batch_size", 64}}},
      {"temporal", {{"normalize", true}}},
      {"evaluation", {{"train_fraction", 0.8}, {"seed", 42}, {"stratified", true}, {"repeats", 1}}},
      {"baseline", {{"max_categories", 10}}},
      {"workers", 1},
      {"output", "out"}};

  std::size_t positives = 0;
  for (int l : corpus.labels) positives += static_cast<std::size_t>(l);
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : truth.patterns) {
    patterns.push_back({{"flags", p.flags},
                        {"probability", p.probability},
                        {"positive_probability", p.positive_probability}});
  }
  nlohmann::json ground_truth{
      {"spec", corpus_spec_to_json(spec)},
      {"mechanism",
       "label ~ Bernoulli(sigmoid(intercept + sum_j strength_j * flag_j)); flags are independent. "
       "risk_diagnosis: the diagnosis text contains one of the risk terms; elderly: age >= 65; "
       "lactate_missing: the lactate cell is missing (informative missingness only). "
       "All other columns are independent of the label."},
      {"risk_terms", std::vector<std::string>(std::begin(kRiskTerms), std::end(kRiskTerms))},
      {"signals", truth.signal_names},
      {"strengths", truth.strengths},
      {"intercept", truth.intercept},
      {"patterns", patterns},
      {"expected_positive_rate", truth.expected_positive_rate},
      {"bayes_auroc", truth.bayes_auroc},
      {"n_entities", spec.n_entities},
      {"n_positive", positives}};

  corpus.files["demographics.csv"] = std::move(demographics);
  corpus.files["encounters.csv"] = std::move(encounters);
  corpus.files["labs.csv"] = std::move(labs);
  corpus.files["vitals.csv"] = std::move(vitals);
  corpus.files["labels.csv"] = std::move(labels);
  corpus.files["demographics.schema.json"] = demographics_schema.dump(2) + "\n";
  corpus.files["encounters.schema.json"] = encounters_schema.dump(2) + "\n";
  corpus.files["labs.schema.json"] = labs_schema.dump(2) + "\n";
  corpus.files["vitals.schema.json"] = vitals_schema.dump(2) + "\n";
  corpus.files["config.json"] = config.dump(2) + "\n";
  corpus.files["ground_truth.json"] = ground_truth.dump(2) + "\n";
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [name, contents] : corpus.files) write_file((directory / name).string(), contents);
}

}  // namespace tabtext
