#pragma once

// Per-subject feature vector: eight spectral features per channel plus the
// frontal/temporal alpha and beta asymmetries.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ltstress/error.hpp"
#include "ltstress/preprocess.hpp"
#include "ltstress/spectral.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

// Column order of the per-channel block.
inline const std::vector<std::string>& channel_feature_bands() {
  static const std::vector<std::string> names{"delta", "theta", "slow", "alpha", "low_beta", "beta", "gamma", "RG"};
  return names;
}

inline const std::vector<std::string>& asymmetry_feature_names() {
  static const std::vector<std::string> names{"alpha_frontal", "alpha_temporal", "alpha_asym", "beta_frontal",
                                              "beta_temporal"};
  return names;
}

inline std::vector<std::string> feature_names(const std::vector<std::string>& montage = default_montage()) {
  std::vector<std::string> names;
  for (const auto& ch : montage)
    for (const auto& band : channel_feature_bands()) names.push_back(band + "_" + ch);
  for (const auto& a : asymmetry_feature_names()) names.push_back(a);
  return names;
}

struct FeatureVector {
  std::string subject_id;
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  }

  double at(std::string_view name) const {
    if (auto i = index_of(name)) return values[*i];
    throw Error(ErrorCode::UnknownFeature, subject_id + " has no feature " + std::string(name));
  }
};

// (right - left) / (left + right), shared by every asymmetry.
inline double normalized_asymmetry(double left, double right) {
  if (!(left >= 0.0) || !(right >= 0.0) || !std::isfinite(left) || !std::isfinite(right))
    throw Error(ErrorCode::DegenerateDenominator, "asymmetry inputs must be finite and non-negative");
  const double sum = left + right;
  if (!(sum > std::numeric_limits<double>::min()))
    throw Error(ErrorCode::DegenerateDenominator, "both hemisphere powers are zero");
  return (right - left) / sum;
}

inline double frontal_alpha_asymmetry(double alpha_af3, double alpha_af4) {
  return normalized_asymmetry(alpha_af3, alpha_af4);
}

inline double temporal_alpha_asymmetry(double alpha_t7, double alpha_t8) {
  return normalized_asymmetry(alpha_t7, alpha_t8);
}

inline double alpha_asymmetry(double frontal, double temporal) { return frontal + temporal; }

struct BetaAsymmetries {
  double frontal;
  double temporal;
};

inline BetaAsymmetries beta_asymmetries(double beta_af3, double beta_af4, double beta_t7, double beta_t8) {
  return {normalized_asymmetry(beta_af3, beta_af4), normalized_asymmetry(beta_t7, beta_t8)};
}

struct FeatureConfig {
  std::size_t window_len = kDefaultWindowLen;
  double overlap_frac = kDefaultOverlap;
  RgDirection rg_direction = RgDirection::gamma_over_slow;
};

// Band powers for every standard band of one channel.
inline std::map<std::string, double> channel_band_powers(const PsdEstimate& psd) {
  std::map<std::string, double> out;
  for (const auto& band : standard_bands()) out[band.name] = band_power(psd, band);
  return out;
}

inline FeatureVector build_feature_vector(const CleanRecording& clean, const FeatureConfig& config = {}) {
  const auto& rec = clean.recording;
  FeatureVector fv;
  fv.subject_id = rec.subject_id;

  std::map<std::string, std::map<std::string, double>> powers;  // channel -> band -> power
  std::vector<std::string> montage;
  for (const auto& ch : rec.channels) {
    montage.push_back(ch.name);
    const auto psd = welch_psd(ch.samples, rec.sample_rate_hz, config.window_len, config.overlap_frac);
    auto bp = channel_band_powers(psd);
    for (const auto& band : channel_feature_bands()) {
      const double v = band == "RG" ? relative_gamma(bp, config.rg_direction) : bp.at(band);
      fv.names.push_back(band + "_" + ch.name);
      fv.values.push_back(v);
    }
    powers[ch.name] = std::move(bp);
  }

  auto band_at = [&](const std::string& channel, const std::string& band) {
    const auto it = powers.find(channel);
    if (it == powers.end())
      throw Error(ErrorCode::MissingChannel, rec.subject_id + ": asymmetries need channel " + channel);
    return it->second.at(band);
  };

  const double af = frontal_alpha_asymmetry(band_at("AF3", "alpha"), band_at("AF4", "alpha"));
  const double at = temporal_alpha_asymmetry(band_at("T7", "alpha"), band_at("T8", "alpha"));
  const auto beta = beta_asymmetries(band_at("AF3", "beta"), band_at("AF4", "beta"), band_at("T7", "beta"),
                                     band_at("T8", "beta"));
  for (const auto& [name, value] : std::vector<std::pair<std::string, double>>{
           {"alpha_frontal", af},
           {"alpha_temporal", at},
           {"alpha_asym", alpha_asymmetry(af, at)},
           {"beta_frontal", beta.frontal},
           {"beta_temporal", beta.temporal}}) {
    fv.names.push_back(name);
    fv.values.push_back(value);
  }

  for (std::size_t i = 0; i < fv.values.size(); ++i)
    if (!std::isfinite(fv.values[i]))
      throw Error(ErrorCode::NonFiniteFeature, rec.subject_id + ": feature " + fv.names[i] + " is not finite");
  return fv;
}

// ---------------------------------------------------------------------------
// Feature matrix export

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureVector> rows;

  const FeatureVector* find(std::string_view subject_id) const {
    for (const auto& r : rows)
      if (r.subject_id == subject_id) return &r;
    return nullptr;
  }
};

inline std::string features_to_csv(const FeatureTable& table) {
  std::string out = "subject_id";
  for (const auto& n : table.names) out += "," + n;
  out += '\n';
  for (const auto& row : table.rows) {
    out += row.subject_id;
    for (double v : row.values) out += "," + text::format_double(v);
    out += '\n';
  }
  return out;
}

inline std::string features_to_json(const FeatureTable& table) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    obj["subject_id"] = row.subject_id;
    nlohmann::ordered_json values;
    for (std::size_t i = 0; i < row.names.size(); ++i) values[row.names[i]] = row.values[i];
    obj["features"] = std::move(values);
    doc.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

inline FeatureTable parse_features_csv(std::string_view content) {
  const auto rows = text::lines(content);
  if (rows.empty()) throw Error(ErrorCode::Parse, "feature CSV is empty");
  const auto header = text::split(rows.front(), ',');
  if (header.empty() || text::trim(header.front()) != "subject_id")
    throw Error(ErrorCode::Parse, "feature CSV header must start with subject_id");
  FeatureTable table;
  for (std::size_t c = 1; c < header.size(); ++c) table.names.emplace_back(text::trim(header[c]));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = text::split(rows[r], ',');
    if (cells.size() != header.size())
      throw Error(ErrorCode::Parse, "feature CSV row " + std::to_string(r + 1) + " has wrong field count");
    FeatureVector fv;
    fv.subject_id = std::string(text::trim(cells[0]));
    fv.names = table.names;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!text::parse_double(cells[c], v))
        throw Error(ErrorCode::Parse, "feature CSV row " + std::to_string(r + 1) + ": bad number");
      fv.values.push_back(v);
    }
    table.rows.push_back(std::move(fv));
  }
  return table;
}

}  // namespace ltstress
