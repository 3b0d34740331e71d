#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ltstress/classify/common.hpp"

namespace ltstress::classify {

// Euclidean distance over all attributes.
inline double knn_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::ArityMismatch, "distance between vectors of arity " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

struct KnnModel {
  std::size_t k{5};
  Matrix points;  // standardized
  std::vector<Label> labels;

  // Neighbours are ranked by distance, then by coordinates, then by label,
  // which makes the result independent of training-set order.
  double p_stress(std::span<const double> z) const {
    std::vector<std::size_t> idx(points.size());
    std::vector<double> dist(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      idx[i] = i;
      dist[i] = knn_distance(points[i], z);
    }
    const std::size_t kk = effective_k();
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (dist[a] != dist[b]) return dist[a] < dist[b];
                        if (points[a] != points[b]) return points[a] < points[b];
                        return labels[a] < labels[b];
                      });
    std::size_t stress = 0;
    for (std::size_t r = 0; r < kk; ++r) stress += labels[idx[r]] == Label::stress;
    return static_cast<double>(stress) / static_cast<double>(kk);
  }

  // k capped at the largest odd count not exceeding the training size.
  std::size_t effective_k() const {
    std::size_t kk = std::min(k, points.size());
    if (kk % 2 == 0) --kk;
    return std::max<std::size_t>(kk, 1);
  }
};

inline KnnModel train_knn(const Matrix& Z, const std::vector<Label>& y, std::size_t k) {
  return {k, Z, y};
}

}  // namespace ltstress::classify
