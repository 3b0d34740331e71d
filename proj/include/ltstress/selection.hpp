#pragma once

// Two-sample t-test feature screening between stress and control groups.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ltstress/error.hpp"
#include "ltstress/labeling.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

enum class TTestVariant { welch, pooled };

inline std::string_view to_string(TTestVariant v) { return v == TTestVariant::welch ? "welch" : "pooled"; }

struct TTestResult {
  std::string feature_name;
  double t_stat{0.0};
  double p_value{1.0};
  double dof{0.0};
  std::size_t n_stress{0};
  std::size_t n_control{0};
  bool degenerate{false};  // both groups had zero variance
};

// Two-tailed P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_tailed_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = dof / (dof + t * t);
  return std::clamp(boost::math::ibeta(dof / 2.0, 0.5, x), 0.0, 1.0);
}

namespace detail {
struct Moments {
  double mean;
  double var;  // n-1 denominator
  double n;
};

inline Moments moments(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size() - 1), static_cast<double>(x.size())};
}
}  // namespace detail

// t is positive when group_a has the larger mean. group_a is treated as the
// stress group in the reported counts.
inline TTestResult t_test(std::span<const double> group_a, std::span<const double> group_b,
                          TTestVariant variant = TTestVariant::welch) {
  if (group_a.size() < 2 || group_b.size() < 2)
    throw Error(ErrorCode::InsufficientGroup, "t-test needs at least 2 values per group, got " +
                                                  std::to_string(group_a.size()) + " and " +
                                                  std::to_string(group_b.size()));
  for (auto g : {group_a, group_b})
    for (double v : g)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "t-test input is not finite");

  const auto a = detail::moments(group_a);
  const auto b = detail::moments(group_b);
  TTestResult r;
  r.n_stress = group_a.size();
  r.n_control = group_b.size();
  const double diff = a.mean - b.mean;

  double se = 0.0;
  if (variant == TTestVariant::welch) {
    const double va = a.var / a.n;
    const double vb = b.var / b.n;
    se = std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  } else {
    r.dof = a.n + b.n - 2.0;
    const double pooled = ((a.n - 1.0) * a.var + (b.n - 1.0) * b.var) / r.dof;
    se = std::sqrt(pooled * (1.0 / a.n + 1.0 / b.n));
  }

  if (!(se > 0.0)) {
    r.degenerate = true;
    r.dof = a.n + b.n - 2.0;
    if (diff == 0.0) {
      r.t_stat = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_stat = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_stat = diff / se;
  r.p_value = student_t_two_tailed_p(r.t_stat, r.dof);
  return r;
}

struct SelectionResult {
  std::vector<TTestResult> table;      // one row per feature, feature order
  std::vector<std::string> selected;   // p < alpha, ascending p
  double alpha_level{0.05};
  TTestVariant variant{TTestVariant::welch};

  bool is_selected(std::string_view name) const {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
  }
};

// Selection from a finished table; no multiple-comparison correction.
inline std::vector<std::string> select_by_p(const std::vector<TTestResult>& table, double alpha_level) {
  std::vector<const TTestResult*> hits;
  for (const auto& r : table)
    if (r.p_value < alpha_level) hits.push_back(&r);
  std::stable_sort(hits.begin(), hits.end(),
                   [](const TTestResult* x, const TTestResult* y) { return x->p_value < y->p_value; });
  std::vector<std::string> names;
  for (const auto* r : hits) names.push_back(r->feature_name);
  return names;
}

inline SelectionResult select_features(const LabeledDataset& dataset, double alpha_level = 0.05,
                                       TTestVariant variant = TTestVariant::welch) {
  if (dataset.count(Label::stress) == 0 || dataset.count(Label::control) == 0)
    throw Error(ErrorCode::EmptyClass, "feature selection needs both stress and control subjects");
  SelectionResult out;
  out.alpha_level = alpha_level;
  out.variant = variant;
  for (std::size_t f = 0; f < dataset.feature_names.size(); ++f) {
    std::vector<double> stress, control;
    for (const auto& row : dataset.rows) (row.label == Label::stress ? stress : control).push_back(row.features.values[f]);
    auto r = t_test(stress, control, variant);
    r.feature_name = dataset.feature_names[f];
    out.table.push_back(std::move(r));
  }
  out.selected = select_by_p(out.table, alpha_level);
  return out;
}

inline std::string ttest_report_to_csv(const SelectionResult& sel) {
  std::string out = "feature,t,dof,p,selected\n";
  for (const auto& r : sel.table)
    out += r.feature_name + "," + text::format_double(r.t_stat) + "," + text::format_double(r.dof) + "," +
           text::format_double(r.p_value) + "," + (sel.is_selected(r.feature_name) ? "1" : "0") + "\n";
  return out;
}

}  // namespace ltstress
