#pragma once

// L2-penalized logistic regression fit by gradient descent with Armijo
// backtracking. The bias is not penalized.

#include <cmath>
#include <vector>

#include "ltstress/classify/common.hpp"

namespace ltstress::classify {

struct LogisticParams {
  double lambda{1e-2};
  double gradient_tolerance{1e-8};
  std::size_t max_iterations{10'000};
};

struct LogisticModel {
  std::vector<double> weights;
  double bias{0.0};
  std::size_t iterations{0};
  double gradient_norm{0.0};
  std::vector<double> objective_history;  // one entry per accepted iterate, starting at the initial point

  double p_stress(std::span<const double> z) const { return sigmoid(dot(weights, z) + bias); }
};

namespace detail {

// Mean log-loss plus lambda/2 |w|^2; fills grad (weights then bias).
inline double logistic_objective(const Matrix& Z, const std::vector<double>& t, const std::vector<double>& w, double b,
                                 double lambda, std::vector<double>* grad) {
  const std::size_t d = w.size();
  const double n = static_cast<double>(Z.size());
  double loss = 0.0;
  if (grad) grad->assign(d + 1, 0.0);
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const double s = dot(w, Z[i]) + b;
    // log(1 + e^s) - t s, evaluated without overflow
    loss += (s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s))) - t[i] * s;
    if (grad) {
      const double r = sigmoid(s) - t[i];
      for (std::size_t j = 0; j < d; ++j) (*grad)[j] += r * Z[i][j];
      (*grad)[d] += r;
    }
  }
  double penalty = 0.0;
  for (double v : w) penalty += v * v;
  if (grad) {
    for (double& g : *grad) g /= n;
    for (std::size_t j = 0; j < d; ++j) (*grad)[j] += lambda * w[j];
  }
  return loss / n + 0.5 * lambda * penalty;
}

}  // namespace detail

inline LogisticModel train_logistic(const Matrix& Z, const std::vector<Label>& y, const LogisticParams& params) {
  const std::size_t d = Z.front().size();
  std::vector<double> t;
  for (auto l : y) t.push_back(l == Label::stress ? 1.0 : 0.0);

  LogisticModel m;
  m.weights.assign(d, 0.0);
  std::vector<double> grad, trial_w(d);
  double f = detail::logistic_objective(Z, t, m.weights, m.bias, params.lambda, &grad);
  m.objective_history.push_back(f);
  double step = 1.0;

  auto norm = [](const std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
  };

  while (true) {
    m.gradient_norm = norm(grad);
    if (m.gradient_norm < params.gradient_tolerance) return m;
    if (m.iterations >= params.max_iterations)
      throw Error(ErrorCode::NoConvergence, "logistic regression: " + std::to_string(m.iterations) +
                                                " iterations, gradient norm " + text::format_double(m.gradient_norm) +
                                                ", objective " + text::format_double(f));
    const double g2 = m.gradient_norm * m.gradient_norm;
    step = std::min(step * 2.0, 1e6);
    double trial_f = 0.0, trial_b = 0.0;
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = m.weights[j] - step * grad[j];
      trial_b = m.bias - step * grad[d];
      trial_f = detail::logistic_objective(Z, t, trial_w, trial_b, params.lambda, nullptr);
      const double required = 1e-4 * step * g2;
      // Near the optimum the required decrease falls below the rounding of f;
      // a non-increasing step is then accepted.
      const bool below_rounding = required < 1e-14 * std::abs(f);
      if (trial_f <= f - required || (below_rounding && trial_f <= f)) {
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted)
      throw Error(ErrorCode::NoConvergence, "logistic regression line search failed at iteration " +
                                                std::to_string(m.iterations) + ", gradient norm " +
                                                text::format_double(m.gradient_norm));
    m.weights = trial_w;
    m.bias = trial_b;
    f = detail::logistic_objective(Z, t, m.weights, m.bias, params.lambda, &grad);
    m.objective_history.push_back(f);
    ++m.iterations;
  }
}

}  // namespace ltstress::classify
