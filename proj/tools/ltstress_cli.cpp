// Command-line front end for the long-term stress EEG pipeline.
//
//   ltstress synth    --spec spec.json --out dir/
//   ltstress extract  --manifest m.json --out features.csv
//   ltstress label    --manifest m.json --method pss|expert --out labels.csv
//   ltstress select   --feature-matrix features.csv --labels labels.csv
//   ltstress train    --feature-matrix features.csv --labels labels.csv --classifier svm --features alpha_asym
//   ltstress evaluate --feature-matrix features.csv --labels labels.csv --classifiers svm,lr
//   ltstress report   --manifest m.json --feature-matrix features.csv --out dir/
//   ltstress run      --manifest m.json --out dir/
//
// Exit codes: 0 ok, 2 validation error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ltstress/pipeline.hpp"
#include "ltstress/synth.hpp"

namespace fs = std::filesystem;
using namespace ltstress;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Output location: explicit flag, else $LTSTRESS_OUT, else the fallback.
fs::path output_path(const std::string& flag, const std::string& fallback_name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LTSTRESS_OUT"); env && *env) return fs::path(env) / fallback_name;
  return fallback_name;
}

void write_output(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  text::write_file(path, content);
  std::cerr << "wrote " << path.string() << "\n";
}

std::vector<std::string> parse_montage(const std::string& s) {
  std::vector<std::string> out;
  for (auto name : text::split(s, ','))
    if (!text::trim(name).empty()) out.emplace_back(text::trim(name));
  if (out.empty()) throw Error(ErrorCode::Parse, "--montage is empty");
  return out;
}

LabeledDataset load_dataset(const std::string& features_path, const std::string& labels_path) {
  const auto table = parse_features_csv(text::read_file(features_path));
  const auto labels = parse_labels_csv(text::read_file(labels_path));
  return assemble_dataset(labels, table);
}

struct RunFlags {
  std::string manifest, config, out, method, classifiers, feature_sets, rg_direction, montage;
  std::optional<double> alpha, overlap;
  std::optional<std::size_t> folds, window;
  std::optional<std::uint64_t> seed;
  bool no_stratify{false}, pooled{false}, population_sd{false};
};

RunConfig resolve_run_config(const RunFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : config_from_json(nlohmann::json::parse(text::read_file(f.config)));
  if (!f.manifest.empty()) c.manifest_path = f.manifest;
  if (c.manifest_path.empty()) throw Error(ErrorCode::Parse, "run needs --manifest or a config with one");
  if (!f.method.empty()) c.method = parse_label_method(f.method);
  if (!f.classifiers.empty()) c.classifiers = parse_classifier_list(f.classifiers);
  if (!f.feature_sets.empty()) c.feature_sets = parse_feature_sets(f.feature_sets);
  if (!f.rg_direction.empty()) c.rg_direction = parse_rg_direction(f.rg_direction);
  if (!f.montage.empty()) c.montage = parse_montage(f.montage);
  if (f.alpha) c.alpha_level = *f.alpha;
  if (f.overlap) c.overlap = *f.overlap;
  if (f.folds) c.folds = *f.folds;
  if (f.window) c.window_len = *f.window;
  if (f.seed) c.seed = *f.seed;
  if (f.no_stratify) c.stratified = false;
  if (f.pooled) c.ttest = TTestVariant::pooled;
  if (f.population_sd) c.pss_sd = SdKind::population;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-term stress classification from baseline EEG"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic EEG cohort");
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_effect, synth_noise;
  synth_cmd->add_option("--spec", synth_spec, "Cohort spec JSON (defaults: 10 stress, 10 control, 13 neutral)");
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--seed", synth_seed, "Override the spec seed");
  synth_cmd->add_option("--asymmetry-effect", synth_effect, "Override the stress alpha multiplier");
  synth_cmd->add_option("--noise-sd", synth_noise, "Override the white-noise SD (uV)");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Compute the feature matrix for every manifest subject");
  std::string ex_manifest, ex_out, ex_format = "csv", ex_rg = "gamma_over_slow", ex_montage, ex_psd_dir;
  std::size_t ex_window = kDefaultWindowLen;
  double ex_overlap = kDefaultOverlap;
  extract_cmd->add_option("--manifest", ex_manifest, "Subject manifest JSON")->required();
  extract_cmd->add_option("--out", ex_out, "Feature matrix path");
  extract_cmd->add_option("--format", ex_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  extract_cmd->add_option("--window", ex_window, "Welch window length in samples");
  extract_cmd->add_option("--overlap", ex_overlap, "Welch overlap fraction");
  extract_cmd->add_option("--rg-direction", ex_rg, "gamma_over_slow or slow_over_gamma");
  extract_cmd->add_option("--montage", ex_montage, "Comma-separated channel list");
  extract_cmd->add_option("--psd-dir", ex_psd_dir, "Also write per-channel PSD CSVs here");

  // label
  auto* label_cmd = app.add_subcommand("label", "Assign stress/control labels");
  std::string lb_manifest, lb_method = "pss", lb_out;
  bool lb_population = false;
  label_cmd->add_option("--manifest", lb_manifest, "Subject manifest JSON")->required();
  label_cmd->add_option("--method", lb_method, "pss or expert")->check(CLI::IsMember({"pss", "expert"}));
  label_cmd->add_flag("--population-sd", lb_population, "Use the population SD for the PSS thresholds");
  label_cmd->add_option("--out", lb_out, "Labels CSV path");

  // select
  auto* select_cmd = app.add_subcommand("select", "t-test every feature between stress and control");
  std::string se_features, se_labels, se_out;
  double se_alpha = 0.05;
  bool se_pooled = false;
  select_cmd->add_option("--feature-matrix", se_features, "Feature CSV")->required();
  select_cmd->add_option("--labels", se_labels, "Labels CSV")->required();
  select_cmd->add_option("--alpha", se_alpha, "Significance level");
  select_cmd->add_flag("--pooled", se_pooled, "Student's pooled-variance test instead of Welch");
  select_cmd->add_option("--out", se_out, "t-test report path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one classifier and save the model");
  std::string tr_features, tr_labels, tr_kind = "svm", tr_names = "alpha_asym", tr_hp, tr_out;
  std::uint64_t tr_seed = 42;
  train_cmd->add_option("--feature-matrix", tr_features, "Feature CSV")->required();
  train_cmd->add_option("--labels", tr_labels, "Labels CSV")->required();
  train_cmd->add_option("--classifier", tr_kind, "svm, nb, knn, lr or mlp");
  train_cmd->add_option("--features", tr_names, "Features joined by '+' or ','");
  train_cmd->add_option("--hyperparams", tr_hp, "Hyperparameter JSON object");
  train_cmd->add_option("--seed", tr_seed, "Training seed");
  train_cmd->add_option("--out", tr_out, "Model JSON path");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate classifiers over feature sets");
  std::string ev_features, ev_labels, ev_classifiers = "svm,nb,knn,lr,mlp", ev_sets, ev_out;
  std::size_t ev_folds = 10;
  std::uint64_t ev_seed = 42;
  bool ev_no_stratify = false;
  eval_cmd->add_option("--feature-matrix", ev_features, "Feature CSV")->required();
  eval_cmd->add_option("--labels", ev_labels, "Labels CSV")->required();
  eval_cmd->add_option("--classifiers", ev_classifiers, "Comma-separated classifiers");
  eval_cmd->add_option("--feature-sets", ev_sets, "Sets separated by ';', features within a set by '+'");
  eval_cmd->add_option("--folds", ev_folds, "Number of folds");
  eval_cmd->add_option("--seed", ev_seed, "Fold assignment and training seed");
  eval_cmd->add_flag("--no-stratify", ev_no_stratify, "Plain random folds");
  eval_cmd->add_option("--out", ev_out, "Output directory");

  // report
  auto* report_cmd = app.add_subcommand("report", "Histogram and box-plot statistics");
  std::string rp_manifest, rp_features, rp_out;
  bool rp_population = false;
  report_cmd->add_option("--manifest", rp_manifest, "Subject manifest JSON")->required();
  report_cmd->add_option("--feature-matrix", rp_features, "Feature CSV")->required();
  report_cmd->add_flag("--population-sd", rp_population, "Use the population SD for the PSS thresholds");
  report_cmd->add_option("--out", rp_out, "Output directory");

  // run
  auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline");
  RunFlags rf;
  run_cmd->add_option("--manifest", rf.manifest, "Subject manifest JSON");
  run_cmd->add_option("--config", rf.config, "Run config JSON (e.g. a previous config.json)");
  run_cmd->add_option("--out", rf.out, "Artifact directory");
  run_cmd->add_option("--method", rf.method, "pss or expert");
  run_cmd->add_option("--alpha", rf.alpha, "t-test significance level");
  run_cmd->add_option("--classifiers", rf.classifiers, "Comma-separated classifiers");
  run_cmd->add_option("--feature-sets", rf.feature_sets, "Sets separated by ';', features within a set by '+'");
  run_cmd->add_option("--folds", rf.folds, "Number of folds");
  run_cmd->add_option("--seed", rf.seed, "Fold assignment and training seed");
  run_cmd->add_flag("--no-stratify", rf.no_stratify, "Plain random folds");
  run_cmd->add_option("--rg-direction", rf.rg_direction, "gamma_over_slow or slow_over_gamma");
  run_cmd->add_flag("--pooled", rf.pooled, "Student's pooled-variance t-test");
  run_cmd->add_flag("--population-sd", rf.population_sd, "Population SD for the PSS thresholds");
  run_cmd->add_option("--window", rf.window, "Welch window length");
  run_cmd->add_option("--overlap", rf.overlap, "Welch overlap fraction");
  run_cmd->add_option("--montage", rf.montage, "Comma-separated channel list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth_cmd) {
      auto spec = synth_spec.empty() ? synth::CohortSpec{}
                                     : synth::spec_from_json(nlohmann::json::parse(text::read_file(synth_spec)));
      if (synth_seed) spec.seed = *synth_seed;
      if (synth_effect) spec.asymmetry_effect = *synth_effect;
      if (synth_noise) spec.noise_sd = *synth_noise;
      const fs::path out = synth_out.empty() ? output_path("", "cohort") : fs::path(synth_out);
      synth::write_cohort(synth::generate_cohort(spec), out);
      std::cerr << "wrote cohort of " << spec.total() << " subjects to " << out.string() << "\n";
    } else if (*extract_cmd) {
      IngestConfig ingest;
      if (!ex_montage.empty()) ingest.montage = parse_montage(ex_montage);
      ingest.min_samples = 2 * ex_window;
      const FeatureConfig fc{ex_window, ex_overlap, parse_rg_direction(ex_rg)};
      const auto manifest = load_manifest(ex_manifest);
      const auto extraction = extract_cohort(manifest, ingest, fc);
      for (const auto& inv : extraction.invalid)
        std::cerr << "excluded " << inv.subject_id << ": " << inv.detail << "\n";
      const auto out = output_path(ex_out, ex_format == "json" ? "features.json" : "features.csv");
      write_output(out, ex_format == "json" ? features_to_json(extraction.table) : features_to_csv(extraction.table));
      if (!ex_psd_dir.empty()) {
        for (const auto& entry : manifest.entries) {
          IngestConfig cfg = ingest;
          cfg.subject_id = entry.subject_id;
          const auto clean = remove_baseline_offset(load_recording(manifest.resolve(entry), cfg));
          for (const auto& ch : clean.recording.channels)
            write_output(fs::path(ex_psd_dir) / (entry.subject_id + "_" + ch.name + ".csv"),
                         psd_to_csv(welch_psd(ch.samples, clean.recording.sample_rate_hz, ex_window, ex_overlap)));
        }
      }
    } else if (*label_cmd) {
      const auto manifest = load_manifest(lb_manifest);
      const auto labels = label_subjects(manifest, parse_label_method(lb_method),
                                         lb_population ? SdKind::population : SdKind::sample);
      for (const auto& w : labels.warnings) std::cerr << "warning: " << w << "\n";
      if (labels.thresholds)
        std::cerr << "PSS thresholds: control < " << text::format_double(labels.thresholds->low) << ", stress > "
                  << text::format_double(labels.thresholds->high) << "\n";
      std::vector<std::string> order;
      for (const auto& e : manifest.entries) order.push_back(e.subject_id);
      write_output(output_path(lb_out, "labels.csv"), labels_to_csv(labels, order));
    } else if (*select_cmd) {
      const auto ds = load_dataset(se_features, se_labels);
      const auto sel = select_features(ds, se_alpha, se_pooled ? TTestVariant::pooled : TTestVariant::welch);
      write_output(output_path(se_out, "ttest_report.csv"), ttest_report_to_csv(sel));
      std::cout << "selected: " << text::join(sel.selected, ",") << "\n";
    } else if (*train_cmd) {
      const auto ds = load_dataset(tr_features, tr_labels);
      std::string names = tr_names;
      std::replace(names.begin(), names.end(), ',', '+');
      const auto features = parse_feature_sets(names).front();
      classify::ClassifierSpec spec;
      spec.kind = classify::parse_classifier_kind(tr_kind);
      spec.seed = tr_seed;
      if (!tr_hp.empty()) spec.hyperparams = nlohmann::json::parse(tr_hp);
      const auto model = classify::train(spec, feature_matrix(ds, features), ds.labels(), features);
      write_output(output_path(tr_out, "model.json"), classify::model_to_json(model).dump(2) + "\n");
    } else if (*eval_cmd) {
      const auto ds = load_dataset(ev_features, ev_labels);
      RunConfig c;
      c.classifiers = parse_classifier_list(ev_classifiers);
      if (!ev_sets.empty()) c.feature_sets = parse_feature_sets(ev_sets);
      c.folds = ev_folds;
      c.seed = ev_seed;
      c.stratified = !ev_no_stratify;
      const auto report = evaluate_sets(c, ds);
      const fs::path dir = ev_out.empty() ? output_path("", ".") : fs::path(ev_out);
      write_output(dir / "evaluation_report.json", report_to_json(report).dump(2) + "\n");
      write_output(dir / "table2.csv", table2_to_csv(report));
      write_output(dir / "table3.csv", table3_to_csv(report));
      std::cout << table2_to_csv(report);
    } else if (*report_cmd) {
      const auto manifest = load_manifest(rp_manifest);
      const auto table = parse_features_csv(text::read_file(rp_features));
      const auto sd = rp_population ? SdKind::population : SdKind::sample;
      const auto scores = manifest_scores(manifest);
      const fs::path dir = rp_out.empty() ? output_path("", ".") : fs::path(rp_out);
      std::vector<BoxRow> boxes;
      if (scores.size() >= 2) {
        write_output(dir / "histogram.csv", histogram_to_csv(pss_histogram(scores, pss_thresholds(scores, sd))));
        for (auto& r : feature_boxplots(assemble_dataset(label_by_pss(manifest, sd), table))) boxes.push_back(r);
      }
      for (auto& r : feature_boxplots(assemble_dataset(label_by_expert(manifest), table))) boxes.push_back(r);
      write_output(dir / "boxplots.csv", boxplots_to_csv(boxes));
    } else if (*run_cmd) {
      const auto config = resolve_run_config(rf);
      const fs::path out = rf.out.empty() ? output_path("", "ltstress_run") : fs::path(rf.out);
      const auto res = run_pipeline(config, out);
      std::cout << "selected features: " << text::join(res.selection.selected, ",") << "\n";
      std::cout << table2_to_csv(res.report);
      std::cerr << "artifacts in " << out.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
