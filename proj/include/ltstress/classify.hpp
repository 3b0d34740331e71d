#pragma once

// Uniform train/predict interface over the five classifiers, plus the
// versioned JSON model document.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ltstress/classify/common.hpp"
#include "ltstress/classify/knn.hpp"
#include "ltstress/classify/logistic.hpp"
#include "ltstress/classify/mlp.hpp"
#include "ltstress/classify/naive_bayes.hpp"
#include "ltstress/classify/svm.hpp"

namespace ltstress::classify {

enum class ClassifierKind { svm, naive_bayes, knn, logistic_regression, mlp };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::naive_bayes: return "naive_bayes";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::mlp: return "mlp";
  }
  return "svm";
}

// Column heading used in the accuracy tables.
inline std::string_view short_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm: return "SVM";
    case ClassifierKind::naive_bayes: return "NB";
    case ClassifierKind::knn: return "KNN";
    case ClassifierKind::logistic_regression: return "LR";
    case ClassifierKind::mlp: return "MLP";
  }
  return "SVM";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "svm") return ClassifierKind::svm;
  if (s == "nb" || s == "naive_bayes") return ClassifierKind::naive_bayes;
  if (s == "knn") return ClassifierKind::knn;
  if (s == "lr" || s == "logistic_regression") return ClassifierKind::logistic_regression;
  if (s == "mlp") return ClassifierKind::mlp;
  throw Error(ErrorCode::Parse, "unknown classifier '" + std::string(s) + "' (svm, nb, knn, lr, mlp)");
}

using Hyperparams = nlohmann::json;

struct ClassifierSpec {
  ClassifierKind kind{ClassifierKind::svm};
  Hyperparams hyperparams = Hyperparams::object();
  std::uint64_t seed{0};
};

namespace detail {

inline double number_param(const Hyperparams& hp, const char* key, double fallback) {
  if (!hp.contains(key) || hp[key].is_null()) return fallback;
  if (!hp[key].is_number()) throw Error(ErrorCode::InvalidHyperparameter, std::string(key) + " must be a number");
  return hp[key].get<double>();
}

inline std::size_t count_param(const Hyperparams& hp, const char* key, std::size_t fallback) {
  const double v = number_param(hp, key, static_cast<double>(fallback));
  if (!(v >= 0) || v != std::floor(v))
    throw Error(ErrorCode::InvalidHyperparameter, std::string(key) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline void reject_unknown(const Hyperparams& hp, std::initializer_list<const char*> known, ClassifierKind kind) {
  for (auto it = hp.begin(); it != hp.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok)
      throw Error(ErrorCode::InvalidHyperparameter,
                  "unknown hyperparameter '" + it.key() + "' for " + std::string(to_string(kind)));
  }
}

}  // namespace detail

// Fills defaults and validates. The SVM gamma default (1 / feature count)
// is left null until the feature count is known.
inline Hyperparams resolve_hyperparams(ClassifierKind kind, const Hyperparams& given) {
  const Hyperparams hp = given.is_null() ? Hyperparams::object() : given;
  if (!hp.is_object()) throw Error(ErrorCode::InvalidHyperparameter, "hyperparameters must be a JSON object");
  Hyperparams out = Hyperparams::object();
  switch (kind) {
    case ClassifierKind::svm: {
      detail::reject_unknown(hp, {"C", "kernel", "gamma", "tolerance"}, kind);
      out["C"] = detail::number_param(hp, "C", 1.0);
      if (!(out["C"].get<double>() > 0)) throw Error(ErrorCode::InvalidHyperparameter, "svm C must be > 0");
      const std::string kernel = hp.contains("kernel") ? hp["kernel"].get<std::string>() : "linear";
      if (kernel != "linear" && kernel != "rbf")
        throw Error(ErrorCode::InvalidHyperparameter, "svm kernel must be linear or rbf");
      out["kernel"] = kernel;
      out["gamma"] = hp.contains("gamma") ? hp["gamma"] : Hyperparams(nullptr);
      if (!out["gamma"].is_null() && !(out["gamma"].get<double>() > 0))
        throw Error(ErrorCode::InvalidHyperparameter, "svm gamma must be > 0");
      out["tolerance"] = detail::number_param(hp, "tolerance", 1e-3);
      break;
    }
    case ClassifierKind::naive_bayes: {
      detail::reject_unknown(hp, {"variance_floor"}, kind);
      out["variance_floor"] = detail::number_param(hp, "variance_floor", kNbVarianceFloor);
      if (!(out["variance_floor"].get<double>() > 0))
        throw Error(ErrorCode::InvalidHyperparameter, "variance_floor must be > 0");
      break;
    }
    case ClassifierKind::knn: {
      detail::reject_unknown(hp, {"k"}, kind);
      const auto k = detail::count_param(hp, "k", 5);
      if (k < 1 || k % 2 == 0) throw Error(ErrorCode::InvalidHyperparameter, "knn k must be odd and >= 1");
      out["k"] = k;
      break;
    }
    case ClassifierKind::logistic_regression: {
      detail::reject_unknown(hp, {"lambda", "gradient_tolerance", "max_iterations"}, kind);
      out["lambda"] = detail::number_param(hp, "lambda", 1e-2);
      if (!(out["lambda"].get<double>() >= 0)) throw Error(ErrorCode::InvalidHyperparameter, "lambda must be >= 0");
      out["gradient_tolerance"] = detail::number_param(hp, "gradient_tolerance", 1e-8);
      out["max_iterations"] = detail::count_param(hp, "max_iterations", 10'000);
      break;
    }
    case ClassifierKind::mlp: {
      detail::reject_unknown(hp, {"hidden_units", "learning_rate", "epochs", "init_range"}, kind);
      out["hidden_units"] = detail::count_param(hp, "hidden_units", 10);
      if (out["hidden_units"].get<std::size_t>() < 1)
        throw Error(ErrorCode::InvalidHyperparameter, "mlp hidden_units must be >= 1");
      out["learning_rate"] = detail::number_param(hp, "learning_rate", 0.1);
      if (!(out["learning_rate"].get<double>() > 0))
        throw Error(ErrorCode::InvalidHyperparameter, "mlp learning_rate must be > 0");
      out["epochs"] = detail::count_param(hp, "epochs", 2000);
      out["init_range"] = detail::number_param(hp, "init_range", 0.5);
      break;
    }
  }
  return out;
}

using ModelParameters = std::variant<SvmModel, NaiveBayesModel, KnnModel, LogisticModel, MlpModel>;

struct TrainedModel {
  ClassifierKind kind{ClassifierKind::svm};
  Hyperparams hyperparams;
  std::uint64_t seed{0};
  std::vector<std::string> feature_names;
  StandardScaler scaler;
  std::size_t n_stress{0};
  std::size_t n_control{0};
  ModelParameters parameters;

  std::size_t arity() const { return scaler.mean.size(); }

  template <class T>
  const T& as() const {
    return std::get<T>(parameters);
  }
};

inline TrainedModel train(const ClassifierSpec& spec, const Matrix& X, const std::vector<Label>& y,
                          std::vector<std::string> feature_names = {}) {
  check_training_data(X, y);
  TrainedModel model;
  model.kind = spec.kind;
  model.seed = spec.seed;
  model.hyperparams = resolve_hyperparams(spec.kind, spec.hyperparams);
  model.feature_names = std::move(feature_names);
  for (auto l : y) (l == Label::stress ? model.n_stress : model.n_control)++;
  model.scaler = StandardScaler::fit(X);
  const Matrix Z = model.scaler.transform(X);
  const auto& hp = model.hyperparams;
  const std::size_t d = X.front().size();

  switch (spec.kind) {
    case ClassifierKind::svm: {
      SvmParams p;
      p.C = hp["C"].get<double>();
      p.kernel.kind = hp["kernel"] == "rbf" ? KernelKind::rbf : KernelKind::linear;
      if (hp["gamma"].is_null()) model.hyperparams["gamma"] = 1.0 / static_cast<double>(d);
      p.kernel.gamma = model.hyperparams["gamma"].get<double>();
      p.tolerance = hp["tolerance"].get<double>();
      model.parameters = train_svm(Z, y, p);
      break;
    }
    case ClassifierKind::naive_bayes:
      model.parameters = train_naive_bayes(Z, y, hp["variance_floor"].get<double>());
      break;
    case ClassifierKind::knn:
      model.parameters = train_knn(Z, y, hp["k"].get<std::size_t>());
      break;
    case ClassifierKind::logistic_regression: {
      LogisticParams p;
      p.lambda = hp["lambda"].get<double>();
      p.gradient_tolerance = hp["gradient_tolerance"].get<double>();
      p.max_iterations = hp["max_iterations"].get<std::size_t>();
      model.parameters = train_logistic(Z, y, p);
      break;
    }
    case ClassifierKind::mlp: {
      MlpParams p;
      p.hidden_units = hp["hidden_units"].get<std::size_t>();
      p.learning_rate = hp["learning_rate"].get<double>();
      p.epochs = hp["epochs"].get<std::size_t>();
      p.init_range = hp["init_range"].get<double>();
      model.parameters = train_mlp(Z, y, p, spec.seed);
      break;
    }
  }
  return model;
}

// Raw SVM decision value in standardized space; other kinds throw.
inline double decision_value(const TrainedModel& model, std::span<const double> x) {
  return model.as<SvmModel>().decision_value(model.scaler.transform(x));
}

inline Prediction predict(const TrainedModel& model, std::span<const double> x) {
  const Row z = model.scaler.transform(x);
  const double p = std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) return m.platt(m.decision_value(z));
        else return m.p_stress(z);
      },
      model.parameters);
  return from_probability(p);
}

// ---------------------------------------------------------------------------
// Model document

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json model_to_json(const TrainedModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = "ltstress-model";
  doc["version"] = kModelFormatVersion;
  doc["kind"] = std::string(to_string(model.kind));
  doc["hyperparams"] = model.hyperparams;
  doc["seed"] = model.seed;
  doc["feature_names"] = model.feature_names;
  doc["scaler"] = {{"mean", model.scaler.mean}, {"sd", model.scaler.sd}};
  doc["class_counts"] = {{"stress", model.n_stress}, {"control", model.n_control}};
  nlohmann::ordered_json p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          p["kernel"] = std::string(to_string(m.kernel.kind));
          p["gamma"] = m.kernel.gamma;
          p["support_vectors"] = m.support_vectors;
          p["coefs"] = m.coefs;
          p["bias"] = m.bias;
          p["platt"] = {{"A", m.platt.A}, {"B", m.platt.B}};
          p["kkt_violation"] = m.kkt_violation;
          p["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          p["variance_floor"] = m.variance_floor;
          p["prior"] = {{"control", m.prior[0]}, {"stress", m.prior[1]}};
          p["mean"] = {{"control", m.mean[0]}, {"stress", m.mean[1]}};
          p["var"] = {{"control", m.var[0]}, {"stress", m.var[1]}};
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          p["k"] = m.k;
          p["points"] = m.points;
          std::vector<std::string> labels;
          for (auto l : m.labels) labels.emplace_back(to_string(l));
          p["labels"] = labels;
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          p["weights"] = m.weights;
          p["bias"] = m.bias;
          p["iterations"] = m.iterations;
          p["gradient_norm"] = m.gradient_norm;
        } else {
          p["hidden_w"] = m.weights.hidden_w;
          p["hidden_b"] = m.weights.hidden_b;
          p["out_w"] = m.weights.out_w;
          p["out_b"] = m.weights.out_b;
          p["final_loss"] = m.final_loss;
        }
      },
      model.parameters);
  doc["parameters"] = std::move(p);
  return doc;
}

inline TrainedModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "ltstress-model") throw Error(ErrorCode::Parse, "not an ltstress model document");
    if (doc.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::Parse, "unsupported model version " + doc.at("version").dump());
    TrainedModel model;
    model.kind = parse_classifier_kind(doc.at("kind").get<std::string>());
    model.hyperparams = doc.at("hyperparams");
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.scaler.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
    model.scaler.sd = doc.at("scaler").at("sd").get<std::vector<double>>();
    model.n_stress = doc.at("class_counts").at("stress").get<std::size_t>();
    model.n_control = doc.at("class_counts").at("control").get<std::size_t>();
    const auto& p = doc.at("parameters");
    switch (model.kind) {
      case ClassifierKind::svm: {
        SvmModel m;
        m.kernel.kind = p.at("kernel") == "rbf" ? KernelKind::rbf : KernelKind::linear;
        m.kernel.gamma = p.at("gamma").get<double>();
        m.support_vectors = p.at("support_vectors").get<Matrix>();
        m.coefs = p.at("coefs").get<std::vector<double>>();
        m.bias = p.at("bias").get<double>();
        m.platt = {p.at("platt").at("A").get<double>(), p.at("platt").at("B").get<double>()};
        m.kkt_violation = p.at("kkt_violation").get<double>();
        m.iterations = p.at("iterations").get<std::size_t>();
        model.parameters = std::move(m);
        break;
      }
      case ClassifierKind::naive_bayes: {
        NaiveBayesModel m;
        m.variance_floor = p.at("variance_floor").get<double>();
        m.prior = {p.at("prior").at("control").get<double>(), p.at("prior").at("stress").get<double>()};
        m.mean = {p.at("mean").at("control").get<std::vector<double>>(),
                  p.at("mean").at("stress").get<std::vector<double>>()};
        m.var = {p.at("var").at("control").get<std::vector<double>>(),
                 p.at("var").at("stress").get<std::vector<double>>()};
        model.parameters = std::move(m);
        break;
      }
      case ClassifierKind::knn: {
        KnnModel m;
        m.k = p.at("k").get<std::size_t>();
        m.points = p.at("points").get<Matrix>();
        for (const auto& l : p.at("labels")) m.labels.push_back(l == "stress" ? Label::stress : Label::control);
        model.parameters = std::move(m);
        break;
      }
      case ClassifierKind::logistic_regression: {
        LogisticModel m;
        m.weights = p.at("weights").get<std::vector<double>>();
        m.bias = p.at("bias").get<double>();
        m.iterations = p.at("iterations").get<std::size_t>();
        m.gradient_norm = p.at("gradient_norm").get<double>();
        model.parameters = std::move(m);
        break;
      }
      case ClassifierKind::mlp: {
        MlpModel m;
        m.weights.hidden_w = p.at("hidden_w").get<Matrix>();
        m.weights.hidden_b = p.at("hidden_b").get<std::vector<double>>();
        m.weights.out_w = p.at("out_w").get<std::vector<double>>();
        m.weights.out_b = p.at("out_b").get<double>();
        m.final_loss = p.at("final_loss").get<double>();
        model.parameters = std::move(m);
        break;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace ltstress::classify
