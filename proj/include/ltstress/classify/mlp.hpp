#pragma once

// One-hidden-layer perceptron: sigmoid hidden units, sigmoid output, trained
// by full-batch backpropagation on the squared error 1/2 (y - f(x))^2.

#include <random>
#include <vector>

#include "ltstress/classify/common.hpp"

namespace ltstress::classify {

inline double mlp_loss(double y, double f_x) { return 0.5 * (y - f_x) * (y - f_x); }

struct MlpParams {
  std::size_t hidden_units{10};
  double learning_rate{0.1};
  std::size_t epochs{2000};
  double init_range{0.5};
};

struct MlpWeights {
  Matrix hidden_w;               // hidden_units x inputs
  std::vector<double> hidden_b;  // hidden_units
  std::vector<double> out_w;     // hidden_units
  double out_b{0.0};

  std::size_t hidden_units() const { return hidden_b.size(); }
  std::size_t inputs() const { return hidden_w.empty() ? 0 : hidden_w.front().size(); }

  // Flat view in the order hidden_w (row-major), hidden_b, out_w, out_b.
  std::vector<double> flatten() const {
    std::vector<double> p;
    for (const auto& row : hidden_w) p.insert(p.end(), row.begin(), row.end());
    p.insert(p.end(), hidden_b.begin(), hidden_b.end());
    p.insert(p.end(), out_w.begin(), out_w.end());
    p.push_back(out_b);
    return p;
  }

  void assign(std::span<const double> p) {
    std::size_t k = 0;
    for (auto& row : hidden_w)
      for (double& v : row) v = p[k++];
    for (double& v : hidden_b) v = p[k++];
    for (double& v : out_w) v = p[k++];
    out_b = p[k];
  }

  double forward(std::span<const double> z, std::vector<double>* hidden = nullptr) const {
    const std::size_t H = hidden_units();
    double o = out_b;
    if (hidden) hidden->resize(H);
    for (std::size_t h = 0; h < H; ++h) {
      const double a = sigmoid(dot(hidden_w[h], z) + hidden_b[h]);
      if (hidden) (*hidden)[h] = a;
      o += out_w[h] * a;
    }
    return sigmoid(o);
  }
};

inline MlpWeights init_mlp(std::size_t inputs, std::size_t hidden_units, double init_range, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-init_range, init_range);
  MlpWeights w;
  w.hidden_w.assign(hidden_units, Row(inputs));
  w.hidden_b.resize(hidden_units);
  w.out_w.resize(hidden_units);
  for (auto& row : w.hidden_w)
    for (double& v : row) v = u(rng);
  for (double& v : w.hidden_b) v = u(rng);
  for (double& v : w.out_w) v = u(rng);
  w.out_b = u(rng);
  return w;
}

// Mean of the per-example squared-error loss.
inline double mlp_mean_loss(const MlpWeights& w, const Matrix& Z, const std::vector<double>& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i) s += mlp_loss(t[i], w.forward(Z[i]));
  return s / static_cast<double>(Z.size());
}

// Backpropagated gradient of mlp_mean_loss, shaped like the weights.
inline MlpWeights mlp_gradient(const MlpWeights& w, const Matrix& Z, const std::vector<double>& t) {
  const std::size_t H = w.hidden_units(), d = w.inputs();
  const double n = static_cast<double>(Z.size());
  MlpWeights g;
  g.hidden_w.assign(H, Row(d, 0.0));
  g.hidden_b.assign(H, 0.0);
  g.out_w.assign(H, 0.0);
  std::vector<double> hidden;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const double f = w.forward(Z[i], &hidden);
    const double delta_out = -(t[i] - f) * f * (1.0 - f) / n;
    g.out_b += delta_out;
    for (std::size_t h = 0; h < H; ++h) {
      g.out_w[h] += delta_out * hidden[h];
      const double delta_h = delta_out * w.out_w[h] * hidden[h] * (1.0 - hidden[h]);
      g.hidden_b[h] += delta_h;
      for (std::size_t j = 0; j < d; ++j) g.hidden_w[h][j] += delta_h * Z[i][j];
    }
  }
  return g;
}

struct MlpModel {
  MlpWeights weights;
  double final_loss{0.0};

  double p_stress(std::span<const double> z) const { return weights.forward(z); }
};

inline MlpModel train_mlp(const Matrix& Z, const std::vector<Label>& y, const MlpParams& params, std::uint64_t seed) {
  std::vector<double> t;
  for (auto l : y) t.push_back(l == Label::stress ? 1.0 : 0.0);
  MlpModel m;
  m.weights = init_mlp(Z.front().size(), params.hidden_units, params.init_range, seed);
  auto p = m.weights.flatten();
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const auto g = mlp_gradient(m.weights, Z, t).flatten();
    for (std::size_t k = 0; k < p.size(); ++k) p[k] -= params.learning_rate * g[k];
    m.weights.assign(p);
  }
  m.final_loss = mlp_mean_loss(m.weights, Z, t);
  return m;
}

}  // namespace ltstress::classify
