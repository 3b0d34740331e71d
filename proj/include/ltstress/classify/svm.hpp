#pragma once

// Soft-margin C-SVM trained with SMO (maximal violating pair working set),
// with Platt scaling of the decision values for probability output.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ltstress/classify/common.hpp"

namespace ltstress::classify {

enum class KernelKind { linear, rbf };

inline std::string_view to_string(KernelKind k) { return k == KernelKind::linear ? "linear" : "rbf"; }

struct Kernel {
  KernelKind kind{KernelKind::linear};
  double gamma{1.0};

  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == KernelKind::linear) return dot(a, b);
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-gamma * d2);
  }
};

struct SvmParams {
  double C{1.0};
  Kernel kernel;
  double tolerance{1e-3};  // stop when the maximal KKT violation drops below this
  std::size_t max_iterations{1'000'000};
};

struct PlattSigmoid {
  double A{0.0};
  double B{0.0};

  // P(stress | f) = 1 / (1 + exp(A f + B))
  double operator()(double f) const { return sigmoid(-(A * f + B)); }
};

struct SvmModel {
  Kernel kernel;
  Matrix support_vectors;     // standardized space
  std::vector<double> coefs;  // alpha_i * y_i
  double bias{0.0};
  PlattSigmoid platt;
  double kkt_violation{0.0};
  std::size_t iterations{0};

  double decision_value(std::span<const double> z) const {
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) s += coefs[i] * kernel(support_vectors[i], z);
    return s;
  }
};

struct SmoResult {
  std::vector<double> alpha;
  double bias{0.0};
  double kkt_violation{0.0};
  std::size_t iterations{0};
};

// Solves min 1/2 a'Qa - e'a s.t. 0 <= a <= C, y'a = 0 with Q_ij = y_i y_j K_ij.
inline SmoResult smo_solve(const Matrix& Z, const std::vector<double>& y, const SvmParams& params) {
  const std::size_t n = Z.size();
  const double C = params.C;
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = params.kernel(Z[i], Z[j]);
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i * n + j]; };

  std::vector<double> alpha(n, 0.0), G(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] < 0 && alpha[t] < C) || (y[t] > 0 && alpha[t] > 0); };
  constexpr double tau = 1e-12;

  SmoResult res;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * G[t];
      if (in_up(t) && v > gmax) gmax = v, i = t;
      if (in_low(t) && v < gmin) gmin = v, j = t;
    }
    res.kkt_violation = (i == n || j == n) ? 0.0 : gmax - gmin;
    if (res.kkt_violation < params.tolerance) break;
    if (res.iterations >= params.max_iterations)
      throw Error(ErrorCode::NoConvergence, "SMO stopped after " + std::to_string(res.iterations) +
                                                " iterations with KKT violation " +
                                                text::format_double(res.kkt_violation));
    ++res.iterations;

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = K[i * n + i] + K[j * n + j] + 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      double quad = K[i * n + i] + K[j * n + j] - 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, i) * dai + Q(t, j) * daj;
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  res.bias = -rho;
  res.alpha = std::move(alpha);
  return res;
}

// Platt scaling with the Newton / backtracking procedure of Lin, Lin & Weng.
inline PlattSigmoid fit_platt(const std::vector<double>& dec, const std::vector<double>& y) {
  const std::size_t n = dec.size();
  double prior1 = 0, prior0 = 0;
  for (double v : y) (v > 0 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = y[i] > 0 ? hi : lo;

  auto objective = [&](double A, double B) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dec[i] * A + B;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(A, B);
  constexpr double sigma = 1e-12, min_step = 1e-10, eps = 1e-5;
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dec[i] * A + B;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= min_step) {
      const double nA = A + step * dA, nB = B + step * dB;
      const double nf = objective(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA, B = nB, fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  return {A, B};
}

inline SvmModel train_svm(const Matrix& Z, const std::vector<Label>& labels, const SvmParams& params) {
  std::vector<double> y;
  y.reserve(labels.size());
  for (auto l : labels) y.push_back(sign_of(l));
  const auto sol = smo_solve(Z, y, params);

  SvmModel model;
  model.kernel = params.kernel;
  model.bias = sol.bias;
  model.kkt_violation = sol.kkt_violation;
  model.iterations = sol.iterations;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    if (sol.alpha[i] > 0) {
      model.support_vectors.push_back(Z[i]);
      model.coefs.push_back(sol.alpha[i] * y[i]);
    }
  }
  std::vector<double> dec;
  dec.reserve(Z.size());
  for (const auto& z : Z) dec.push_back(model.decision_value(z));
  model.platt = fit_platt(dec, y);
  return model;
}

}  // namespace ltstress::classify
