#pragma once

// EEG recording and subject manifest formats.
//
// Recording CSV:
//   time_s,AF3,T7,Pz,T8,AF4
//   0,<uV>,<uV>,...
// Samples are microvolts. The sample rate comes from IngestConfig, from a
// sidecar JSON next to the CSV (same stem, ".json", key "sample_rate_hz"),
// or is inferred from the time column. A declared rate that disagrees with
// the time column by more than 1% is rejected.
//
// Manifest JSON: array of objects with keys subject_id, pss_items,
// expert_label ("stress" | "control" | "unlabeled"), recording_path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ltstress/error.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

inline const std::vector<std::string>& default_montage() {
  static const std::vector<std::string> montage{"AF3", "T7", "Pz", "T8", "AF4"};
  return montage;
}

inline constexpr double kNominalSampleRateHz = 128.0;
inline constexpr std::size_t kPssItemCount = 10;
inline constexpr int kPssItemMax = 4;

struct ChannelSeries {
  std::string name;
  std::vector<double> samples;  // microvolts
};

struct Recording {
  std::string subject_id;
  double sample_rate_hz{kNominalSampleRateHz};
  std::vector<ChannelSeries> channels;
  double duration_s{0.0};

  std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().samples.size(); }

  const ChannelSeries& channel(std::string_view name) const {
    for (const auto& ch : channels)
      if (ch.name == name) return ch;
    throw Error(ErrorCode::MissingChannel, "recording " + subject_id + " has no channel " + std::string(name));
  }
};

struct IngestConfig {
  std::vector<std::string> montage = default_montage();
  std::optional<double> sample_rate_hz;
  std::optional<std::string> subject_id;
  std::size_t min_samples = 256;  // two 128-sample Welch windows
  double rate_tolerance = 0.01;
};

// Checks every Recording invariant and reorders channels into montage order.
inline void validate_recording(Recording& rec, const IngestConfig& config) {
  if (!(rec.sample_rate_hz > 0.0) || !std::isfinite(rec.sample_rate_hz))
    throw Error(ErrorCode::BadSampleRate, rec.subject_id + ": sample rate must be positive");

  std::set<std::string> seen;
  for (const auto& ch : rec.channels) {
    if (std::find(config.montage.begin(), config.montage.end(), ch.name) == config.montage.end())
      throw Error(ErrorCode::UnknownChannel, rec.subject_id + ": channel " + ch.name + " not in montage");
    if (!seen.insert(ch.name).second)
      throw Error(ErrorCode::UnknownChannel, rec.subject_id + ": duplicate channel " + ch.name);
  }

  std::vector<ChannelSeries> ordered;
  ordered.reserve(config.montage.size());
  for (const auto& name : config.montage) {
    auto it = std::find_if(rec.channels.begin(), rec.channels.end(),
                           [&](const ChannelSeries& ch) { return ch.name == name; });
    if (it == rec.channels.end())
      throw Error(ErrorCode::MissingChannel, rec.subject_id + ": montage channel " + name + " absent");
    ordered.push_back(std::move(*it));
  }
  rec.channels = std::move(ordered);

  const std::size_t n = rec.channels.front().samples.size();
  for (const auto& ch : rec.channels) {
    if (ch.samples.size() != n)
      throw Error(ErrorCode::RaggedChannels, rec.subject_id + ": channel " + ch.name + " has " +
                                                 std::to_string(ch.samples.size()) + " samples, expected " +
                                                 std::to_string(n));
    for (std::size_t i = 0; i < ch.samples.size(); ++i)
      if (!std::isfinite(ch.samples[i]))
        throw Error(ErrorCode::NonFiniteSample,
                    rec.subject_id + ": channel " + ch.name + " sample " + std::to_string(i) + " is not finite");
  }
  if (n < config.min_samples)
    throw Error(ErrorCode::TooShort, rec.subject_id + ": " + std::to_string(n) + " samples, need at least " +
                                         std::to_string(config.min_samples));
  rec.duration_s = static_cast<double>(n) / rec.sample_rate_hz;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

inline Recording load_recording(const std::filesystem::path& path, const IngestConfig& config = {}) {
  const std::string content = text::read_file(path);
  const auto rows = text::lines(content);
  if (rows.empty()) throw Error(ErrorCode::Parse, path.string() + ": empty file");

  Recording rec;
  rec.subject_id = config.subject_id.value_or(path.stem().string());

  std::optional<double> declared = config.sample_rate_hz;
  if (!declared) {
    const auto sidecar = sidecar_path(path);
    if (std::filesystem::exists(sidecar)) {
      const auto meta = nlohmann::json::parse(text::read_file(sidecar), nullptr, false);
      if (meta.is_discarded() || !meta.is_object())
        throw Error(ErrorCode::Parse, sidecar.string() + ": not a JSON object");
      if (meta.contains("sample_rate_hz")) {
        if (!meta["sample_rate_hz"].is_number())
          throw Error(ErrorCode::BadSampleRate, sidecar.string() + ": sample_rate_hz must be a number");
        declared = meta["sample_rate_hz"].get<double>();
      }
      if (!config.subject_id && meta.contains("subject_id") && meta["subject_id"].is_string())
        rec.subject_id = meta["subject_id"].get<std::string>();
    }
  }
  if (declared && !(*declared > 0.0))
    throw Error(ErrorCode::BadSampleRate, path.string() + ": declared sample rate must be positive");

  const auto header = text::split(rows.front(), ',');
  if (header.empty() || text::trim(header.front()) != "time_s")
    throw Error(ErrorCode::Parse, path.string() + ": header must start with time_s");
  for (std::size_t c = 1; c < header.size(); ++c)
    rec.channels.push_back({std::string(text::trim(header[c])), {}});
  if (rec.channels.empty()) throw Error(ErrorCode::MissingChannel, path.string() + ": no channel columns");

  std::vector<double> times;
  times.reserve(rows.size() - 1);
  for (auto& ch : rec.channels) ch.samples.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = text::split(rows[r], ',');
    if (cells.size() != header.size())
      throw Error(ErrorCode::RaggedChannels, path.string() + ": row " + std::to_string(r + 1) + " has " +
                                                 std::to_string(cells.size()) + " fields, expected " +
                                                 std::to_string(header.size()));
    double t = 0.0;
    if (!text::parse_double(cells[0], t) || !std::isfinite(t))
      throw Error(ErrorCode::Parse, path.string() + ": bad time value on row " + std::to_string(r + 1));
    times.push_back(t);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!text::parse_double(cells[c], v))
        throw Error(ErrorCode::Parse, path.string() + ": bad sample on row " + std::to_string(r + 1));
      rec.channels[c - 1].samples.push_back(v);
    }
  }

  std::optional<double> inferred;
  if (times.size() >= 2) {
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw Error(ErrorCode::BadSampleRate, path.string() + ": time column is not strictly increasing");
    inferred = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  }
  if (declared) {
    if (inferred && std::abs(*inferred - *declared) > config.rate_tolerance * *declared)
      throw Error(ErrorCode::BadSampleRate, path.string() + ": declared " + text::format_double(*declared) +
                                                " Hz but time column implies " + text::format_double(*inferred) +
                                                " Hz");
    rec.sample_rate_hz = *declared;
  } else if (inferred) {
    rec.sample_rate_hz = *inferred;
  } else {
    throw Error(ErrorCode::BadSampleRate, path.string() + ": cannot infer sample rate");
  }

  validate_recording(rec, config);
  return rec;
}

inline std::string recording_to_csv(const Recording& rec) {
  std::string out = "time_s";
  for (const auto& ch : rec.channels) out += "," + ch.name;
  out += '\n';
  const std::size_t n = rec.sample_count();
  for (std::size_t i = 0; i < n; ++i) {
    out += text::format_double(static_cast<double>(i) / rec.sample_rate_hz);
    for (const auto& ch : rec.channels) {
      out += ',';
      out += text::format_double(ch.samples[i]);
    }
    out += '\n';
  }
  return out;
}

// Writes the CSV plus a sidecar carrying the exact sample rate.
inline void write_recording(const Recording& rec, const std::filesystem::path& path) {
  text::write_file(path, recording_to_csv(rec));
  nlohmann::ordered_json meta;
  meta["subject_id"] = rec.subject_id;
  meta["sample_rate_hz"] = rec.sample_rate_hz;
  text::write_file(sidecar_path(path), meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Manifest

enum class ExpertLabel { stress, control, unlabeled };

inline std::string_view to_string(ExpertLabel label) {
  switch (label) {
    case ExpertLabel::stress: return "stress";
    case ExpertLabel::control: return "control";
    case ExpertLabel::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

using PssItems = std::array<int, kPssItemCount>;

struct ManifestEntry {
  std::string subject_id;
  std::optional<PssItems> pss_items;
  ExpertLabel expert_label{ExpertLabel::unlabeled};
  std::string recording_path;

  // Neither a PSS response nor an expert label.
  bool unlabeled() const { return !pss_items && expert_label == ExpertLabel::unlabeled; }
};

struct SubjectManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // recording paths are relative to this

  std::filesystem::path resolve(const ManifestEntry& entry) const {
    std::filesystem::path p(entry.recording_path);
    return p.is_absolute() ? p : base_dir / p;
  }

  const ManifestEntry* find(std::string_view subject_id) const {
    for (const auto& e : entries)
      if (e.subject_id == subject_id) return &e;
    return nullptr;
  }
};

inline void validate_manifest(const SubjectManifest& manifest) {
  std::set<std::string> ids;
  for (const auto& e : manifest.entries) {
    if (!ids.insert(e.subject_id).second)
      throw Error(ErrorCode::DuplicateSubject, "subject_id " + e.subject_id + " appears more than once");
    if (e.pss_items)
      for (int item : *e.pss_items)
        if (item < 0 || item > kPssItemMax)
          throw Error(ErrorCode::PssOutOfRange,
                      e.subject_id + ": PSS item " + std::to_string(item) + " outside 0..4");
  }
}

inline SubjectManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir = {}) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Parse, "manifest is not valid JSON");
  if (!doc.is_array()) throw Error(ErrorCode::Parse, "manifest must be a JSON array");

  SubjectManifest manifest;
  manifest.base_dir = std::move(base_dir);
  for (const auto& obj : doc) {
    if (!obj.is_object()) throw Error(ErrorCode::Parse, "manifest entries must be objects");
    ManifestEntry e;
    if (!obj.contains("subject_id") || !obj["subject_id"].is_string())
      throw Error(ErrorCode::Parse, "manifest entry without string subject_id");
    e.subject_id = obj["subject_id"].get<std::string>();

    if (obj.contains("pss_items") && !obj["pss_items"].is_null()) {
      const auto& items = obj["pss_items"];
      if (!items.is_array()) throw Error(ErrorCode::Parse, e.subject_id + ": pss_items must be an array");
      if (items.size() != kPssItemCount)
        throw Error(ErrorCode::PssWrongArity,
                    e.subject_id + ": " + std::to_string(items.size()) + " PSS items, expected 10");
      PssItems values{};
      for (std::size_t i = 0; i < kPssItemCount; ++i) {
        if (!items[i].is_number_integer())
          throw Error(ErrorCode::Parse, e.subject_id + ": PSS items must be integers");
        const auto v = items[i].get<long long>();
        if (v < 0 || v > kPssItemMax)
          throw Error(ErrorCode::PssOutOfRange, e.subject_id + ": PSS item " + std::to_string(v) + " outside 0..4");
        values[i] = static_cast<int>(v);
      }
      e.pss_items = values;
    }

    if (obj.contains("expert_label") && !obj["expert_label"].is_null()) {
      if (!obj["expert_label"].is_string()) throw Error(ErrorCode::Parse, e.subject_id + ": expert_label must be a string");
      const auto label = obj["expert_label"].get<std::string>();
      if (label == "stress") e.expert_label = ExpertLabel::stress;
      else if (label == "control") e.expert_label = ExpertLabel::control;
      else if (label == "unlabeled") e.expert_label = ExpertLabel::unlabeled;
      else throw Error(ErrorCode::Parse, e.subject_id + ": unknown expert_label '" + label + "'");
    }

    if (obj.contains("recording_path") && obj["recording_path"].is_string())
      e.recording_path = obj["recording_path"].get<std::string>();
    manifest.entries.push_back(std::move(e));
  }
  validate_manifest(manifest);
  return manifest;
}

inline SubjectManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(text::read_file(path), path.parent_path());
}

inline std::string manifest_to_json(const SubjectManifest& manifest) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json obj;
    obj["subject_id"] = e.subject_id;
    if (e.pss_items) obj["pss_items"] = *e.pss_items;
    else obj["pss_items"] = nullptr;
    obj["expert_label"] = std::string(to_string(e.expert_label));
    obj["recording_path"] = e.recording_path;
    doc.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

}  // namespace ltstress
