#pragma once

// k-fold cross-validation and pooled classification metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltstress/classify.hpp"
#include "ltstress/labeling.hpp"

namespace ltstress {

struct FoldPlan {
  std::size_t fold_count{10};
  std::vector<std::string> subject_ids;  // dataset order
  std::vector<std::size_t> fold_of;      // parallel to subject_ids
  std::uint64_t seed{0};
  bool stratified{true};

  std::size_t fold_size(std::size_t fold) const {
    return static_cast<std::size_t>(std::count(fold_of.begin(), fold_of.end(), fold));
  }
};

// Subjects are shuffled (per class when stratified) and dealt round-robin
// with one running counter, so fold sizes and per-class fold counts both
// differ by at most one.
inline FoldPlan make_folds(const LabeledDataset& dataset, std::size_t fold_count, std::uint64_t seed,
                           bool stratified = true) {
  const std::size_t n = dataset.rows.size();
  if (fold_count < 2) throw Error(ErrorCode::TooFewSubjects, "need at least 2 folds");
  if (n < fold_count)
    throw Error(ErrorCode::TooFewSubjects, std::to_string(n) + " subjects cannot fill " + std::to_string(fold_count) +
                                               " folds; reduce --folds");
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.fold_of.assign(n, 0);
  for (const auto& r : dataset.rows) plan.subject_ids.push_back(r.subject_id);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    for (Label c : {Label::control, Label::stress}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (dataset.rows[i].label == c) idx.push_back(i);
      if (idx.size() < fold_count)
        throw Error(ErrorCode::TooFewPerClass, std::string(to_string(c)) + " has " + std::to_string(idx.size()) +
                                                   " subjects, fewer than " + std::to_string(fold_count) +
                                                   " folds; reduce --folds or pass --no-stratify");
      groups.push_back(std::move(idx));
    }
  } else {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    groups.push_back(std::move(idx));
  }
  std::size_t counter = 0;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    for (std::size_t i : g) plan.fold_of[i] = counter++ % fold_count;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionMatrix {
  std::size_t true_stress{0};     // truth stress, predicted stress
  std::size_t false_control{0};   // truth stress, predicted control
  std::size_t false_stress{0};    // truth control, predicted stress
  std::size_t true_control{0};    // truth control, predicted control

  std::size_t total() const { return true_stress + false_control + false_stress + true_control; }
};

struct Metrics {
  double accuracy_pct{0.0};
  double kappa{0.0};
  bool kappa_degenerate{false};
  double f_measure{0.0};
  double mae{0.0};
  double rmae{0.0};
  double recall_stress{0.0};
  double recall_control{0.0};
  ConfusionMatrix confusion;
};

// Accuracy in percent; kappa from marginal frequencies; class-weighted F1;
// MAE and RMAE over both class-probability positions (which coincide for a
// binary problem: |1[stress] - p_stress|).
inline Metrics metrics(const std::vector<Label>& predicted, const std::vector<double>& p_stress,
                       const std::vector<Label>& truth) {
  if (predicted.size() != truth.size() || p_stress.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "predictions, probabilities and truth differ in length");
  if (truth.empty()) throw Error(ErrorCode::LengthMismatch, "metrics need at least one prediction");
  Metrics m;
  auto& cm = m.confusion;
  double abs_err = 0.0, sq_err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool ts = truth[i] == Label::stress, ps = predicted[i] == Label::stress;
    if (ts && ps) ++cm.true_stress;
    else if (ts) ++cm.false_control;
    else if (ps) ++cm.false_stress;
    else ++cm.true_control;
    const double e = (ts ? 1.0 : 0.0) - p_stress[i];
    abs_err += std::abs(e);
    sq_err += e * e;
  }
  const double n = static_cast<double>(truth.size());
  const double correct = static_cast<double>(cm.true_stress + cm.true_control);
  const double actual_s = static_cast<double>(cm.true_stress + cm.false_control);
  const double actual_c = static_cast<double>(cm.true_control + cm.false_stress);
  const double pred_s = static_cast<double>(cm.true_stress + cm.false_stress);
  const double pred_c = static_cast<double>(cm.true_control + cm.false_control);

  m.accuracy_pct = 100.0 * correct / n;
  const double po = correct / n;
  const double pe = (actual_s / n) * (pred_s / n) + (actual_c / n) * (pred_c / n);
  if (pe >= 1.0) {
    m.kappa = 0.0;
    m.kappa_degenerate = true;
  } else {
    m.kappa = (po - pe) / (1.0 - pe);
  }

  auto f1 = [](double hit, double predicted_count, double actual_count) {
    const double precision = predicted_count > 0 ? hit / predicted_count : 0.0;
    const double recall = actual_count > 0 ? hit / actual_count : 0.0;
    return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  };
  m.f_measure = (actual_s * f1(static_cast<double>(cm.true_stress), pred_s, actual_s) +
                 actual_c * f1(static_cast<double>(cm.true_control), pred_c, actual_c)) /
                n;
  m.recall_stress = actual_s > 0 ? static_cast<double>(cm.true_stress) / actual_s : 0.0;
  m.recall_control = actual_c > 0 ? static_cast<double>(cm.true_control) / actual_c : 0.0;
  m.mae = abs_err / n;
  m.rmae = std::sqrt(sq_err / n);
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct PooledPrediction {
  std::string subject_id;
  std::size_t fold;
  Label truth;
  Label predicted;
  double p_stress;
};

struct FoldSummary {
  std::size_t fold;
  std::size_t tested;
  std::size_t correct;
};

struct CvResult {
  std::string classifier;
  std::vector<std::string> features;
  Metrics metrics;
  std::vector<FoldSummary> folds;
  std::vector<PooledPrediction> predictions;  // dataset order
};

using Predictor = std::function<classify::Prediction(std::span<const double>)>;
using Trainer = std::function<Predictor(const classify::Matrix&, const std::vector<Label>&)>;

inline classify::Matrix feature_matrix(const LabeledDataset& dataset, const std::vector<std::string>& features) {
  std::vector<std::size_t> cols;
  for (const auto& name : features) {
    auto it = std::find(dataset.feature_names.begin(), dataset.feature_names.end(), name);
    if (it == dataset.feature_names.end()) throw Error(ErrorCode::UnknownFeature, "no feature named " + name);
    cols.push_back(static_cast<std::size_t>(it - dataset.feature_names.begin()));
  }
  classify::Matrix X;
  for (const auto& row : dataset.rows) {
    classify::Row x;
    for (auto c : cols) x.push_back(row.features.values[c]);
    X.push_back(std::move(x));
  }
  return X;
}

// Trains on the complement of each fold, predicts the fold, and computes
// metrics over the pooled predictions.
inline CvResult cross_validate_with(const Trainer& trainer, const LabeledDataset& dataset,
                                    const std::vector<std::string>& features, const FoldPlan& plan) {
  if (plan.fold_of.size() != dataset.rows.size())
    throw Error(ErrorCode::LengthMismatch, "fold plan does not match the dataset");
  const auto X = feature_matrix(dataset, features);
  const auto y = dataset.labels();

  CvResult out;
  out.features = features;
  out.predictions.resize(dataset.rows.size());
  for (std::size_t fold = 0; fold < plan.fold_count; ++fold) {
    classify::Matrix Xtr;
    std::vector<Label> ytr;
    for (std::size_t i = 0; i < X.size(); ++i)
      if (plan.fold_of[i] != fold) Xtr.push_back(X[i]), ytr.push_back(y[i]);
    Predictor predictor;
    try {
      predictor = trainer(Xtr, ytr);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(fold) + ": " + e.what());
    }
    FoldSummary summary{fold, 0, 0};
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (plan.fold_of[i] != fold) continue;
      const auto p = predictor(X[i]);
      out.predictions[i] = {dataset.rows[i].subject_id, fold, y[i], p.label, p.p_stress};
      ++summary.tested;
      summary.correct += p.label == y[i];
    }
    out.folds.push_back(summary);
  }

  std::vector<Label> predicted;
  std::vector<double> probs;
  for (const auto& p : out.predictions) predicted.push_back(p.predicted), probs.push_back(p.p_stress);
  out.metrics = metrics(predicted, probs, y);
  return out;
}

inline CvResult cross_validate(const classify::ClassifierSpec& spec, const LabeledDataset& dataset,
                               const std::vector<std::string>& features, const FoldPlan& plan) {
  Trainer trainer = [&](const classify::Matrix& X, const std::vector<Label>& y) -> Predictor {
    auto model = std::make_shared<classify::TrainedModel>(classify::train(spec, X, y, features));
    return [model](std::span<const double> x) { return classify::predict(*model, x); };
  };
  auto result = cross_validate_with(trainer, dataset, features, plan);
  result.classifier = std::string(classify::short_name(spec.kind));
  return result;
}

// ---------------------------------------------------------------------------
// Report

struct EvaluationReport {
  std::uint64_t seed{0};
  std::size_t fold_count{10};
  bool stratified{true};
  LabelMethod method{LabelMethod::pss_threshold};
  std::vector<std::string> classifiers;                 // table column order
  std::vector<std::vector<std::string>> feature_sets;   // table row order
  std::vector<CvResult> results;                        // row-major: feature set, then classifier

  const CvResult& at(std::size_t feature_set, std::size_t classifier) const {
    return results.at(feature_set * classifiers.size() + classifier);
  }
};

inline std::string feature_set_label(const std::vector<std::string>& set) { return text::join(set, "+"); }

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["accuracy_pct"] = m.accuracy_pct;
  j["kappa"] = m.kappa;
  j["kappa_degenerate"] = m.kappa_degenerate;
  j["f_measure"] = m.f_measure;
  j["mae"] = m.mae;
  j["rmae"] = m.rmae;
  j["recall_stress"] = m.recall_stress;
  j["recall_control"] = m.recall_control;
  j["confusion"] = {{"true_stress", m.confusion.true_stress},
                    {"false_control", m.confusion.false_control},
                    {"false_stress", m.confusion.false_stress},
                    {"true_control", m.confusion.true_control}};
  return j;
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json doc;
  doc["plan"] = {{"seed", report.seed},
                 {"fold_count", report.fold_count},
                 {"stratified", report.stratified},
                 {"labelling_method", std::string(to_string(report.method))}};
  doc["metric_conventions"] = {
      {"pooling", "metrics computed on predictions pooled across all folds"},
      {"mae", "mean over subjects of |1[stress] - p_stress|, identical over both class-probability positions"},
      {"rmae", "square root of the mean squared class-probability error"},
      {"f_measure", "per-class F1 weighted by class support"},
      {"kappa", "Cohen's kappa from marginal frequencies; 0 with kappa_degenerate when expected agreement is 1"},
      {"tie_break", "p_stress == 0.5 predicts control"}};
  auto results = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < report.feature_sets.size(); ++s) {
    for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
      const auto& r = report.at(s, c);
      nlohmann::ordered_json j;
      j["classifier"] = r.classifier;
      j["feature_set"] = r.features;
      j["metrics"] = metrics_to_json(r.metrics);
      auto folds = nlohmann::ordered_json::array();
      for (const auto& f : r.folds) folds.push_back({{"fold", f.fold}, {"tested", f.tested}, {"correct", f.correct}});
      j["folds"] = std::move(folds);
      auto preds = nlohmann::ordered_json::array();
      for (const auto& p : r.predictions)
        preds.push_back({{"subject_id", p.subject_id},
                         {"fold", p.fold},
                         {"truth", std::string(to_string(p.truth))},
                         {"predicted", std::string(to_string(p.predicted))},
                         {"p_stress", p.p_stress}});
      j["predictions"] = std::move(preds);
      results.push_back(std::move(j));
    }
  }
  doc["results"] = std::move(results);
  return doc;
}

// Rows are feature sets, columns classifiers, cells pooled accuracy (%).
inline std::string table2_to_csv(const EvaluationReport& report) {
  std::string out = "features";
  for (const auto& c : report.classifiers) out += "," + c;
  out += '\n';
  for (std::size_t s = 0; s < report.feature_sets.size(); ++s) {
    out += feature_set_label(report.feature_sets[s]);
    for (std::size_t c = 0; c < report.classifiers.size(); ++c)
      out += "," + text::format_double(report.at(s, c).metrics.accuracy_pct);
    out += '\n';
  }
  return out;
}

// Full metric rows for the feature set holding the best accuracy, best
// classifier first. Ties keep the earlier feature set and classifier order.
inline std::string table3_to_csv(const EvaluationReport& report) {
  std::string out = "classifier,features,accuracy_pct,kappa,f_measure,mae,rmae\n";
  if (report.results.empty()) return out;
  std::size_t best_set = 0;
  double best = -1.0;
  for (std::size_t s = 0; s < report.feature_sets.size(); ++s)
    for (std::size_t c = 0; c < report.classifiers.size(); ++c)
      if (report.at(s, c).metrics.accuracy_pct > best) best = report.at(s, c).metrics.accuracy_pct, best_set = s;
  std::vector<std::size_t> order(report.classifiers.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.at(best_set, a).metrics.accuracy_pct > report.at(best_set, b).metrics.accuracy_pct;
  });
  for (auto c : order) {
    const auto& r = report.at(best_set, c);
    const auto& m = r.metrics;
    out += r.classifier + "," + feature_set_label(r.features) + "," + text::format_double(m.accuracy_pct) + "," +
           text::format_double(m.kappa) + "," + text::format_double(m.f_measure) + "," + text::format_double(m.mae) +
           "," + text::format_double(m.rmae) + "\n";
  }
  return out;
}

}  // namespace ltstress
