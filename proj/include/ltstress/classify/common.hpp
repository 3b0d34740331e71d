#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ltstress/error.hpp"
#include "ltstress/labeling.hpp"

namespace ltstress::classify {

using Row = std::vector<double>;
using Matrix = std::vector<Row>;

struct Prediction {
  Label label{Label::control};
  double p_stress{0.5};
};

// argmax over the two class probabilities; an exact tie goes to control.
inline Prediction from_probability(double p_stress) {
  return {p_stress > 0.5 ? Label::stress : Label::control, p_stress};
}

inline double sign_of(Label y) { return y == Label::stress ? 1.0 : -1.0; }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void check_training_data(const Matrix& X, const std::vector<Label>& y) {
  if (X.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(X.size()) + " rows but " + std::to_string(y.size()) + " labels");
  if (X.empty()) throw Error(ErrorCode::SingleClassTraining, "no training examples");
  std::size_t stress = 0;
  for (auto label : y) stress += label == Label::stress;
  if (stress == 0 || stress == y.size())
    throw Error(ErrorCode::SingleClassTraining, "training data contains a single class");
  const std::size_t d = X.front().size();
  if (d == 0) throw Error(ErrorCode::ArityMismatch, "training rows have no features");
  for (const auto& row : X) {
    if (row.size() != d) throw Error(ErrorCode::ArityMismatch, "training rows have unequal arity");
    for (double v : row)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "training feature is not finite");
  }
}

// Per-feature standardization fit on training data only. Constant columns
// keep unit scale so they map to zero.
struct StandardScaler {
  std::vector<double> mean;
  std::vector<double> sd;

  static StandardScaler fit(const Matrix& X) {
    StandardScaler s;
    const std::size_t d = X.front().size();
    const double n = static_cast<double>(X.size());
    s.mean.assign(d, 0.0);
    s.sd.assign(d, 0.0);
    for (const auto& row : X)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    for (double& m : s.mean) m /= n;
    for (const auto& row : X)
      for (std::size_t j = 0; j < d; ++j) s.sd[j] += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
    for (double& v : s.sd) {
      v = std::sqrt(v / n);
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  Row transform(std::span<const double> x) const {
    if (x.size() != mean.size())
      throw Error(ErrorCode::ArityMismatch, "vector has " + std::to_string(x.size()) + " features, model expects " +
                                                std::to_string(mean.size()));
    Row out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / sd[j];
    return out;
  }

  Matrix transform(const Matrix& X) const {
    Matrix out;
    out.reserve(X.size());
    for (const auto& row : X) out.push_back(transform(row));
    return out;
  }
};

}  // namespace ltstress::classify
