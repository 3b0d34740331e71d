#pragma once

// Deterministic synthetic EEG cohorts: per-band sinusoids at fixed in-band
// frequencies with random phases, plus white noise. Stress subjects get a
// multiplier on the AF4 and T8 alpha amplitude.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltstress/error.hpp"
#include "ltstress/ingest.hpp"
#include "ltstress/labeling.hpp"

namespace ltstress::synth {

enum class Group { stress, control, neutral };

inline std::string_view to_string(Group g) {
  switch (g) {
    case Group::stress: return "stress";
    case Group::control: return "control";
    case Group::neutral: return "neutral";
  }
  return "neutral";
}

struct Component {
  std::string band;
  double freq_hz;
};

// Integer frequencies sit on the 1 Hz Welch grid, so Hann leakage stays
// within +/-1 bin and inside each band. beta sits below the beta/gamma
// overlap and gamma above it.
inline std::vector<Component> default_components() {
  return {{"delta", 2.0}, {"theta", 5.0}, {"alpha", 10.0}, {"low_beta", 15.0}, {"beta", 21.0}, {"gamma", 34.0}};
}

inline std::map<std::string, double> default_base_amplitudes() {
  return {{"delta", 8.0}, {"theta", 5.0}, {"alpha", 10.0}, {"low_beta", 3.0}, {"beta", 3.0}, {"gamma", 1.5}};
}

struct IntRange {
  int lo;
  int hi;
};

struct CohortSpec {
  std::size_t n_stress{10};
  std::size_t n_control{10};
  std::size_t n_neutral{13};
  double sample_rate_hz{kNominalSampleRateHz};
  double duration_s{180.0};
  std::vector<std::string> montage = default_montage();
  std::vector<Component> components = default_components();
  // group -> channel -> band -> amplitude (uV); filled from base amplitudes
  std::map<Group, std::map<std::string, std::map<std::string, double>>> amplitudes;
  double asymmetry_effect{1.0};
  double amplitude_jitter{0.0};  // sd of a per-subject, per-component log-normal factor
  double noise_sd{1.0};
  std::uint64_t seed{1};
  IntRange pss_control{4, 14};
  IntRange pss_neutral{18, 23};
  IntRange pss_stress{27, 38};

  CohortSpec() { set_base_amplitudes(default_base_amplitudes()); }

  void set_base_amplitudes(const std::map<std::string, double>& base) {
    amplitudes.clear();
    for (Group g : {Group::stress, Group::control, Group::neutral})
      for (const auto& ch : montage)
        for (const auto& [band, a] : base) amplitudes[g][ch][band] = a;
  }

  std::size_t total() const { return n_stress + n_control + n_neutral; }
};

inline void validate(const CohortSpec& spec) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
  if (spec.total() == 0) fail("cohort is empty");
  if (!(spec.sample_rate_hz > 0)) fail("sample_rate_hz must be > 0");
  if (!(spec.duration_s > 0)) fail("duration_s must be > 0");
  if (spec.duration_s * spec.sample_rate_hz < 256) fail("recordings would be shorter than 256 samples");
  if (!(spec.noise_sd >= 0)) fail("noise_sd must be >= 0");
  if (!(spec.asymmetry_effect >= 0)) fail("asymmetry_effect must be >= 0");
  if (!(spec.amplitude_jitter >= 0)) fail("amplitude_jitter must be >= 0");
  for (const auto& c : spec.components)
    if (!(c.freq_hz > 0 && c.freq_hz < spec.sample_rate_hz / 2)) fail("component " + c.band + " above Nyquist");
  for (const auto& [g, chans] : spec.amplitudes)
    for (const auto& [ch, bands] : chans)
      for (const auto& [band, a] : bands)
        if (!(a >= 0) || !std::isfinite(a)) fail("amplitude for " + ch + "/" + band + " must be >= 0");
  for (const auto& r : {spec.pss_control, spec.pss_neutral, spec.pss_stress})
    if (r.lo < 0 || r.hi > 40 || r.lo > r.hi) fail("PSS ranges must lie within 0..40");
}

struct Cohort {
  std::vector<Recording> recordings;
  SubjectManifest manifest;
  std::vector<Group> groups;
};

inline std::uint64_t subject_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 of seed + golden-ratio multiple of (index + 1)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::string subject_name(std::size_t index, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(total).size());
  std::string num = std::to_string(index + 1);
  return "S" + std::string(width - num.size(), '0') + num;
}

// Amplitude of one component for a subject of the given group, before jitter.
inline double nominal_amplitude(const CohortSpec& spec, Group g, const std::string& channel, const std::string& band) {
  double a = 0.0;
  if (auto gi = spec.amplitudes.find(g); gi != spec.amplitudes.end())
    if (auto ci = gi->second.find(channel); ci != gi->second.end())
      if (auto bi = ci->second.find(band); bi != ci->second.end()) a = bi->second;
  if (g == Group::stress && band == "alpha" && (channel == "AF4" || channel == "T8")) a *= spec.asymmetry_effect;
  return a;
}

inline Recording generate_recording(const CohortSpec& spec, Group g, const std::string& subject_id,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));

  Recording rec;
  rec.subject_id = subject_id;
  rec.sample_rate_hz = spec.sample_rate_hz;
  for (const auto& ch : spec.montage) {
    ChannelSeries series{ch, std::vector<double>(n, 0.0)};
    for (const auto& c : spec.components) {
      double a = nominal_amplitude(spec, g, ch, c.band);
      const double jitter = normal(rng);
      const double phase = phase_dist(rng);
      if (spec.amplitude_jitter > 0) a *= std::exp(spec.amplitude_jitter * jitter);
      const double w = 2.0 * std::numbers::pi * c.freq_hz / spec.sample_rate_hz;
      for (std::size_t i = 0; i < n; ++i) series.samples[i] += a * std::sin(w * static_cast<double>(i) + phase);
    }
    if (spec.noise_sd > 0)
      for (double& v : series.samples) v += spec.noise_sd * normal(rng);
    rec.channels.push_back(std::move(series));
  }
  rec.duration_s = static_cast<double>(n) / spec.sample_rate_hz;
  return rec;
}

// Spreads a PSS total over ten items in 0..4.
inline PssItems split_pss_total(int total, std::mt19937_64& rng) {
  PssItems items{};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(kPssItemCount) - 1);
  for (int left = total; left > 0;) {
    const int k = pick(rng);
    if (items[k] < kPssItemMax) ++items[k], --left;
  }
  return items;
}

// Draws group-specific PSS totals and redraws until the mean +/- sd/2
// thresholds reproduce the intended partition.
inline std::vector<int> draw_pss_totals(const CohortSpec& spec, const std::vector<Group>& groups, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> totals;
    std::vector<PssScore> scores;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto r = groups[i] == Group::stress    ? spec.pss_stress
                     : groups[i] == Group::control ? spec.pss_control
                                                   : spec.pss_neutral;
      totals.push_back(std::uniform_int_distribution<int>(r.lo, r.hi)(rng));
      scores.push_back({"", totals.back()});
    }
    if (scores.size() < 2) return totals;
    const auto th = pss_thresholds(scores);
    bool ok = true;
    for (std::size_t i = 0; i < groups.size() && ok; ++i) {
      const double t = totals[i];
      switch (groups[i]) {
        case Group::stress: ok = t > th.high; break;
        case Group::control: ok = t < th.low; break;
        case Group::neutral: ok = t >= th.low && t <= th.high; break;
      }
    }
    if (ok) return totals;
  }
  throw Error(ErrorCode::InvalidSpec, "PSS ranges cannot reproduce the intended stress/control/neutral partition");
}

inline Cohort generate_cohort(const CohortSpec& spec) {
  validate(spec);
  Cohort cohort;
  for (std::size_t i = 0; i < spec.n_stress; ++i) cohort.groups.push_back(Group::stress);
  for (std::size_t i = 0; i < spec.n_control; ++i) cohort.groups.push_back(Group::control);
  for (std::size_t i = 0; i < spec.n_neutral; ++i) cohort.groups.push_back(Group::neutral);

  std::mt19937_64 pss_rng(subject_seed(spec.seed, static_cast<std::size_t>(-1)));
  const auto totals = draw_pss_totals(spec, cohort.groups, pss_rng);

  for (std::size_t i = 0; i < cohort.groups.size(); ++i) {
    const auto id = subject_name(i, cohort.groups.size());
    cohort.recordings.push_back(generate_recording(spec, cohort.groups[i], id, subject_seed(spec.seed, i)));
    ManifestEntry e;
    e.subject_id = id;
    e.pss_items = split_pss_total(totals[i], pss_rng);
    e.expert_label = cohort.groups[i] == Group::stress    ? ExpertLabel::stress
                     : cohort.groups[i] == Group::control ? ExpertLabel::control
                                                          : ExpertLabel::unlabeled;
    e.recording_path = "recordings/" + id + ".csv";
    cohort.manifest.entries.push_back(std::move(e));
  }
  return cohort;
}

// Writes recordings/<id>.csv (+ sidecars) and manifest.json under `dir`.
inline void write_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "recordings");
  for (const auto& rec : cohort.recordings) write_recording(rec, dir / "recordings" / (rec.subject_id + ".csv"));
  text::write_file(dir / "manifest.json", manifest_to_json(cohort.manifest));
}

// ---------------------------------------------------------------------------
// JSON spec

inline Group parse_group(std::string_view s) {
  if (s == "stress") return Group::stress;
  if (s == "control") return Group::control;
  if (s == "neutral") return Group::neutral;
  throw Error(ErrorCode::InvalidSpec, "unknown group " + std::string(s));
}

inline CohortSpec spec_from_json(const nlohmann::json& j) {
  try {
    CohortSpec s;
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "cohort spec must be a JSON object");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("n_stress", s.n_stress);
    get("n_control", s.n_control);
    get("n_neutral", s.n_neutral);
    get("sample_rate_hz", s.sample_rate_hz);
    get("duration_s", s.duration_s);
    get("asymmetry_effect", s.asymmetry_effect);
    get("amplitude_jitter", s.amplitude_jitter);
    get("noise_sd", s.noise_sd);
    get("seed", s.seed);
    if (j.contains("montage")) s.montage = j["montage"].get<std::vector<std::string>>();
    if (j.contains("components")) {
      s.components.clear();
      for (const auto& c : j["components"]) s.components.push_back({c.at("band"), c.at("freq_hz")});
    }
    s.set_base_amplitudes(j.contains("base_amplitudes") ? j["base_amplitudes"].get<std::map<std::string, double>>()
                                                         : default_base_amplitudes());
    if (j.contains("amplitude_overrides"))
      for (const auto& o : j["amplitude_overrides"])
        s.amplitudes[parse_group(o.at("group").get<std::string>())][o.at("channel")][o.at("band")] =
            o.at("amplitude").get<double>();
    for (auto [key, range] : {std::pair{"pss_control", &s.pss_control}, std::pair{"pss_neutral", &s.pss_neutral},
                              std::pair{"pss_stress", &s.pss_stress}})
      if (j.contains(key)) *range = {j[key].at(0).get<int>(), j[key].at(1).get<int>()};
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed cohort spec: ") + e.what());
  }
}

}  // namespace ltstress::synth
