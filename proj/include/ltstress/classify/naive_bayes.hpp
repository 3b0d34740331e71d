#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ltstress/classify/common.hpp"

namespace ltstress::classify {

inline constexpr double kNbVarianceFloor = 1e-9;

// Gaussian class-conditional densities with diagonal covariance.
// Index 0 is control, 1 is stress.
struct NaiveBayesModel {
  double variance_floor{kNbVarianceFloor};
  std::array<double, 2> prior{0.5, 0.5};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;  // maximum-likelihood, floored

  double p_stress(std::span<const double> z) const {
    std::array<double, 2> log_post{};
    for (int c = 0; c < 2; ++c) {
      double lp = std::log(prior[c]);
      for (std::size_t j = 0; j < z.size(); ++j) {
        const double d = z[j] - mean[c][j];
        lp += -0.5 * std::log(2.0 * std::numbers::pi * var[c][j]) - d * d / (2.0 * var[c][j]);
      }
      log_post[c] = lp;
    }
    return sigmoid(log_post[1] - log_post[0]);
  }
};

inline NaiveBayesModel train_naive_bayes(const Matrix& Z, const std::vector<Label>& y,
                                         double variance_floor = kNbVarianceFloor) {
  const std::size_t d = Z.front().size();
  NaiveBayesModel m;
  m.variance_floor = variance_floor;
  std::array<double, 2> count{0, 0};
  for (int c = 0; c < 2; ++c) {
    m.mean[c].assign(d, 0.0);
    m.var[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const int c = static_cast<int>(y[i]);
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += Z[i][j];
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : m.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const int c = static_cast<int>(y[i]);
    for (std::size_t j = 0; j < d; ++j) m.var[c][j] += (Z[i][j] - m.mean[c][j]) * (Z[i][j] - m.mean[c][j]);
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : m.var[c]) v = std::max(v / count[c], variance_floor);
    m.prior[c] = count[c] / static_cast<double>(Z.size());
  }
  return m;
}

}  // namespace ltstress::classify
