#pragma once

// Plot-ready summaries: PSS histogram and per-group box-plot statistics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ltstress/labeling.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

// Linear-interpolation quantile (Hyndman & Fan type 7) of sorted data.
inline double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct BoxStats {
  std::size_t n{0};
  double median{0.0};
  double q1{0.0};
  double q3{0.0};
  double whisker_low{0.0};   // smallest value >= q1 - 1.5 IQR
  double whisker_high{0.0};  // largest value <= q3 + 1.5 IQR
  std::vector<double> outliers;
};

inline BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.n = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.q1 = quantile_type7(values, 0.25);
  b.median = quantile_type7(values, 0.5);
  b.q3 = quantile_type7(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  bool have_low = false;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
      continue;
    }
    if (!have_low) b.whisker_low = v, have_low = true;
    b.whisker_high = v;
  }
  return b;
}

struct HistogramBin {
  int score;
  std::size_t count;
  std::string group;  // control | neutral | stress, from the thresholds
};

// One bin per PSS point over 0..40.
inline std::vector<HistogramBin> pss_histogram(const std::vector<PssScore>& scores, const PssThresholds& th) {
  std::vector<HistogramBin> bins;
  for (int s = 0; s <= 40; ++s) {
    std::size_t count = 0;
    for (const auto& sc : scores) count += sc.total == s;
    const char* group = s < th.low ? "control" : s > th.high ? "stress" : "neutral";
    bins.push_back({s, count, group});
  }
  return bins;
}

inline std::string histogram_to_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "score,count,group\n";
  for (const auto& b : bins) out += std::to_string(b.score) + "," + std::to_string(b.count) + "," + b.group + "\n";
  return out;
}

struct BoxRow {
  std::string feature;
  LabelMethod method;
  Label group;
  BoxStats stats;
};

inline std::vector<BoxRow> feature_boxplots(const LabeledDataset& ds) {
  std::vector<BoxRow> rows;
  for (std::size_t f = 0; f < ds.feature_names.size(); ++f) {
    for (Label g : {Label::control, Label::stress}) {
      std::vector<double> v;
      for (const auto& r : ds.rows)
        if (r.label == g) v.push_back(r.features.values[f]);
      rows.push_back({ds.feature_names[f], ds.method, g, box_stats(std::move(v))});
    }
  }
  return rows;
}

inline std::string boxplots_to_csv(const std::vector<BoxRow>& rows) {
  std::string out = "feature,method,group,n,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& r : rows) {
    const auto& s = r.stats;
    std::vector<std::string> outl;
    for (double v : s.outliers) outl.push_back(text::format_double(v));
    out += r.feature + "," + std::string(to_string(r.method)) + "," + std::string(to_string(r.group)) + "," +
           std::to_string(s.n) + "," + text::format_double(s.median) + "," + text::format_double(s.q1) + "," +
           text::format_double(s.q3) + "," + text::format_double(s.whisker_low) + "," +
           text::format_double(s.whisker_high) + "," + text::join(outl, ";") + "\n";
  }
  return out;
}

}  // namespace ltstress
