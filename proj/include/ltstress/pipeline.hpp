#pragma once

// End-to-end run: ingest -> offset removal -> features -> labels -> t-test
// selection -> cross-validated evaluation -> report tables. Artifacts are
// staged in a sibling directory and renamed into place only on success.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltstress/classify.hpp"
#include "ltstress/evaluate.hpp"
#include "ltstress/features.hpp"
#include "ltstress/ingest.hpp"
#include "ltstress/labeling.hpp"
#include "ltstress/preprocess.hpp"
#include "ltstress/report.hpp"
#include "ltstress/selection.hpp"

namespace ltstress {

// Feature sets of the accuracy table: alpha asymmetry, AF3 beta and gamma,
// and their combinations.
inline std::vector<std::vector<std::string>> default_feature_sets() {
  return {{"alpha_asym"},
          {"gamma_AF3"},
          {"beta_AF3"},
          {"beta_AF3", "gamma_AF3"},
          {"alpha_asym", "beta_AF3"},
          {"alpha_asym", "gamma_AF3"},
          {"alpha_asym", "beta_AF3", "gamma_AF3"}};
}

// "a+b;c" -> {{a, b}, {c}}
inline std::vector<std::vector<std::string>> parse_feature_sets(std::string_view spec) {
  std::vector<std::vector<std::string>> sets;
  for (auto set : text::split(spec, ';')) {
    set = text::trim(set);
    if (set.empty()) continue;
    std::vector<std::string> names;
    for (auto name : text::split(set, '+')) {
      name = text::trim(name);
      if (name.empty()) throw Error(ErrorCode::Parse, "empty feature name in set '" + std::string(set) + "'");
      names.emplace_back(name);
    }
    sets.push_back(std::move(names));
  }
  if (sets.empty()) throw Error(ErrorCode::Parse, "no feature sets given");
  return sets;
}

inline std::vector<classify::ClassifierKind> parse_classifier_list(std::string_view spec) {
  std::vector<classify::ClassifierKind> kinds;
  for (auto name : text::split(spec, ',')) {
    name = text::trim(name);
    if (!name.empty()) kinds.push_back(classify::parse_classifier_kind(name));
  }
  if (kinds.empty()) throw Error(ErrorCode::Parse, "no classifiers given");
  return kinds;
}

struct RunConfig {
  std::string manifest_path;
  LabelMethod method{LabelMethod::expert};
  double alpha_level{0.05};
  std::vector<classify::ClassifierKind> classifiers{
      classify::ClassifierKind::svm, classify::ClassifierKind::naive_bayes, classify::ClassifierKind::knn,
      classify::ClassifierKind::logistic_regression, classify::ClassifierKind::mlp};
  nlohmann::json hyperparams = nlohmann::json::object();  // kind name -> overrides
  std::vector<std::vector<std::string>> feature_sets = default_feature_sets();
  std::size_t folds{10};
  bool stratified{true};
  std::uint64_t seed{42};
  RgDirection rg_direction{RgDirection::gamma_over_slow};
  TTestVariant ttest{TTestVariant::welch};
  SdKind pss_sd{SdKind::sample};
  std::size_t window_len{kDefaultWindowLen};
  double overlap{kDefaultOverlap};
  std::vector<std::string> montage = default_montage();

  IngestConfig ingest_config() const {
    IngestConfig c;
    c.montage = montage;
    c.min_samples = 2 * window_len;
    return c;
  }

  FeatureConfig feature_config() const { return {window_len, overlap, rg_direction}; }

  classify::ClassifierSpec classifier_spec(classify::ClassifierKind kind) const {
    classify::ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    const std::string key(classify::to_string(kind));
    if (hyperparams.contains(key)) spec.hyperparams = hyperparams[key];
    return spec;
  }
};

inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["manifest"] = c.manifest_path;
  j["method"] = std::string(to_string(c.method));
  j["alpha_level"] = c.alpha_level;
  std::vector<std::string> kinds;
  for (auto k : c.classifiers) kinds.emplace_back(classify::to_string(k));
  j["classifiers"] = kinds;
  nlohmann::ordered_json hp;
  for (auto k : c.classifiers) {
    const std::string key(classify::to_string(k));
    hp[key] = classify::resolve_hyperparams(k, c.hyperparams.contains(key) ? c.hyperparams[key] : nlohmann::json());
  }
  j["hyperparams"] = hp;
  j["feature_sets"] = c.feature_sets;
  j["folds"] = c.folds;
  j["stratified"] = c.stratified;
  j["seed"] = c.seed;
  j["rg_direction"] = std::string(to_string(c.rg_direction));
  j["ttest"] = std::string(to_string(c.ttest));
  j["pss_sd"] = std::string(to_string(c.pss_sd));
  j["window"] = c.window_len;
  j["overlap"] = c.overlap;
  j["montage"] = c.montage;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    if (j.contains("manifest")) c.manifest_path = j["manifest"].get<std::string>();
    if (j.contains("method")) c.method = parse_label_method(j["method"].get<std::string>());
    if (j.contains("alpha_level")) c.alpha_level = j["alpha_level"].get<double>();
    if (j.contains("classifiers")) {
      c.classifiers.clear();
      for (const auto& k : j["classifiers"]) c.classifiers.push_back(classify::parse_classifier_kind(k.get<std::string>()));
    }
    if (j.contains("hyperparams")) c.hyperparams = j["hyperparams"];
    if (j.contains("feature_sets")) c.feature_sets = j["feature_sets"].get<std::vector<std::vector<std::string>>>();
    if (j.contains("folds")) c.folds = j["folds"].get<std::size_t>();
    if (j.contains("stratified")) c.stratified = j["stratified"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("rg_direction")) c.rg_direction = parse_rg_direction(j["rg_direction"].get<std::string>());
    if (j.contains("ttest")) c.ttest = j["ttest"] == "pooled" ? TTestVariant::pooled : TTestVariant::welch;
    if (j.contains("pss_sd")) c.pss_sd = j["pss_sd"] == "population" ? SdKind::population : SdKind::sample;
    if (j.contains("window")) c.window_len = j["window"].get<std::size_t>();
    if (j.contains("overlap")) c.overlap = j["overlap"].get<double>();
    if (j.contains("montage")) c.montage = j["montage"].get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed run config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Stages

class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

struct Extraction {
  FeatureTable table;
  std::vector<Exclusion> invalid;  // subjects whose features could not be computed
};

// Ingest and validation failures abort; numerical feature failures exclude
// the subject with the reason recorded.
inline Extraction extract_cohort(const SubjectManifest& manifest, const IngestConfig& ingest,
                                 const FeatureConfig& features) {
  Extraction out;
  out.table.names = feature_names(ingest.montage);
  for (const auto& entry : manifest.entries) {
    if (entry.recording_path.empty()) {
      out.invalid.push_back({entry.subject_id, ExclusionReason::invalid_features, "no recording"});
      continue;
    }
    IngestConfig cfg = ingest;
    cfg.subject_id = entry.subject_id;
    Recording rec;
    try {
      rec = load_recording(manifest.resolve(entry), cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "subject " + entry.subject_id + ": " + e.what());
    }
    try {
      out.table.rows.push_back(build_feature_vector(remove_baseline_offset(std::move(rec)), features));
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw Error(e.code(), "subject " + entry.subject_id + ": " + e.what());
      out.invalid.push_back({entry.subject_id, ExclusionReason::invalid_features, e.what()});
    }
  }
  return out;
}

inline EvaluationReport evaluate_sets(const RunConfig& config, const LabeledDataset& dataset) {
  EvaluationReport report;
  report.seed = config.seed;
  report.fold_count = config.folds;
  report.stratified = config.stratified;
  report.method = dataset.method;
  report.feature_sets = config.feature_sets;
  for (auto k : config.classifiers) report.classifiers.emplace_back(classify::short_name(k));
  const auto plan = make_folds(dataset, config.folds, config.seed, config.stratified);
  for (const auto& set : config.feature_sets)
    for (auto kind : config.classifiers)
      report.results.push_back(cross_validate(config.classifier_spec(kind), dataset, set, plan));
  return report;
}

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content

  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

// Writes every artifact into a staging directory, then swaps it into place.
inline void commit_artifacts(const Artifacts& artifacts, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(out_dir).lexically_normal();
  const fs::path staging = target.parent_path() / (target.filename().string() + ".staging");
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    for (const auto& [name, content] : artifacts.files) text::write_file(staging / name, content);
    fs::remove_all(target);
    fs::rename(staging, target);
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
}

struct PipelineResult {
  Artifacts artifacts;
  LabeledDataset dataset;
  SelectionResult selection;
  EvaluationReport report;
};

// Builds all artifacts in memory; nothing touches the output directory.
inline PipelineResult build_pipeline(const RunConfig& config) {
  PipelineResult res;
  const auto resolved = config_to_json(config);
  const auto manifest = run_stage("ingest", [&] { return load_manifest(config.manifest_path); });
  const auto extraction =
      run_stage("extract", [&] { return extract_cohort(manifest, config.ingest_config(), config.feature_config()); });

  std::vector<std::string> order;
  for (const auto& e : manifest.entries) order.push_back(e.subject_id);
  const auto labels = run_stage("label", [&] { return label_subjects(manifest, config.method, config.pss_sd); });
  res.dataset = assemble_dataset(labels, extraction.table, extraction.invalid);

  res.selection = run_stage("select", [&] { return select_features(res.dataset, config.alpha_level, config.ttest); });
  res.report = run_stage("evaluate", [&] { return evaluate_sets(config, res.dataset); });

  // Both labelling methods feed the box plots where the manifest supports them.
  std::vector<BoxRow> boxes;
  std::string histogram = histogram_to_csv({});
  std::optional<PssThresholds> cohort_th = labels.thresholds;
  run_stage("report", [&] {
    const auto scores = manifest_scores(manifest);
    if (scores.size() >= 2) {
      cohort_th = pss_thresholds(scores, config.pss_sd);
      histogram = histogram_to_csv(pss_histogram(scores, *cohort_th));
    }
    for (LabelMethod m : {LabelMethod::pss_threshold, LabelMethod::expert}) {
      if (m == LabelMethod::pss_threshold && scores.size() < 2) continue;
      const auto ds = assemble_dataset(label_subjects(manifest, m, config.pss_sd), extraction.table, extraction.invalid);
      for (auto& row : feature_boxplots(ds)) boxes.push_back(std::move(row));
    }
    return 0;
  });

  // Labels CSV carries invalid-feature exclusions too.
  LabelAssignment final_labels;
  final_labels.method = res.dataset.method;
  for (const auto& r : res.dataset.rows) final_labels.labeled.push_back({r.subject_id, r.label});
  final_labels.excluded = res.dataset.excluded;

  auto eval_doc = report_to_json(res.report);
  eval_doc["config"] = resolved;
  // Recorded whenever PSS totals exist; they also colour the histogram.
  if (cohort_th)
    eval_doc["pss_thresholds"] = {{"low", cohort_th->low},
                                  {"high", cohort_th->high},
                                  {"mean", cohort_th->mean},
                                  {"sd", cohort_th->sd},
                                  {"sd_kind", std::string(to_string(cohort_th->sd_kind))}};
  eval_doc["selection"] = {{"alpha_level", res.selection.alpha_level},
                           {"ttest", std::string(to_string(res.selection.variant))},
                           {"multiple_comparison_correction", "none"},
                           {"selected", res.selection.selected}};

  auto& a = res.artifacts;
  a.add("config.json", resolved.dump(2) + "\n");
  a.add("features.csv", features_to_csv(extraction.table));
  a.add("labels.csv", labels_to_csv(final_labels, order));
  a.add("ttest_report.csv", ttest_report_to_csv(res.selection));
  a.add("evaluation_report.json", eval_doc.dump(2) + "\n");
  a.add("table2.csv", table2_to_csv(res.report));
  a.add("table3.csv", table3_to_csv(res.report));
  a.add("histogram.csv", histogram);
  a.add("boxplots.csv", boxplots_to_csv(boxes));
  return res;
}

inline PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir) {
  auto res = build_pipeline(config);
  run_stage("write", [&] {
    try {
      commit_artifacts(res.artifacts, out_dir);
    } catch (const std::filesystem::filesystem_error& e) {
      throw Error(ErrorCode::Io, e.what());
    }
    return 0;
  });
  return res;
}

}  // namespace ltstress
