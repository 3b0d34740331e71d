#pragma once

// Stress/control labelling: PSS-10 mean +/- sd/2 thresholds, or expert
// labels carried in the manifest.

#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltstress/error.hpp"
#include "ltstress/features.hpp"
#include "ltstress/ingest.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

enum class Label { control = 0, stress = 1 };

inline std::string_view to_string(Label label) { return label == Label::stress ? "stress" : "control"; }

inline Label flip(Label label) { return label == Label::stress ? Label::control : Label::stress; }

enum class LabelMethod { pss_threshold, expert };

inline std::string_view to_string(LabelMethod m) { return m == LabelMethod::expert ? "expert" : "pss_threshold"; }

inline LabelMethod parse_label_method(std::string_view s) {
  if (s == "pss" || s == "pss_threshold") return LabelMethod::pss_threshold;
  if (s == "expert") return LabelMethod::expert;
  throw Error(ErrorCode::Parse, "labelling method must be pss or expert, got " + std::string(s));
}

enum class ExclusionReason { neutral_band, unlabeled, invalid_features };

inline std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::neutral_band: return "neutral_band";
    case ExclusionReason::unlabeled: return "unlabeled";
    case ExclusionReason::invalid_features: return "invalid_features";
  }
  return "unlabeled";
}

struct PssScore {
  std::string subject_id;
  int total{0};
};

inline int score_pss(const PssItems& items) { return std::accumulate(items.begin(), items.end(), 0); }

inline PssScore score_pss(std::string subject_id, const PssItems& items) {
  return {std::move(subject_id), score_pss(items)};
}

enum class SdKind { sample, population };

inline std::string_view to_string(SdKind k) { return k == SdKind::sample ? "sample" : "population"; }

struct PssThresholds {
  double low{0.0};
  double high{0.0};
  double mean{0.0};
  double sd{0.0};
  SdKind sd_kind{SdKind::sample};
};

inline PssThresholds thresholds_from(double mean, double sd, SdKind kind = SdKind::sample) {
  return {mean - sd / 2.0, mean + sd / 2.0, mean, sd, kind};
}

inline PssThresholds pss_thresholds(const std::vector<PssScore>& scores, SdKind kind = SdKind::sample) {
  if (scores.size() < 2)
    throw Error(ErrorCode::InsufficientCohort, "PSS thresholds need at least 2 scores, got " +
                                                   std::to_string(scores.size()));
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (const auto& s : scores) mean += s.total;
  mean /= n;
  double ss = 0.0;
  for (const auto& s : scores) ss += (s.total - mean) * (s.total - mean);
  const double sd = std::sqrt(ss / (kind == SdKind::sample ? n - 1.0 : n));
  return thresholds_from(mean, sd, kind);
}

struct LabeledSubject {
  std::string subject_id;
  Label label;
};

struct Exclusion {
  std::string subject_id;
  ExclusionReason reason;
  std::string detail;
};

// Subject-level partition before features are attached.
struct LabelAssignment {
  LabelMethod method{LabelMethod::pss_threshold};
  std::vector<LabeledSubject> labeled;
  std::vector<Exclusion> excluded;
  std::optional<PssThresholds> thresholds;
  std::vector<std::string> warnings;

  std::size_t count(Label label) const {
    std::size_t n = 0;
    for (const auto& s : labeled) n += s.label == label;
    return n;
  }
};

// Strict inequalities: a total equal to either threshold is neutral.
inline LabelAssignment label_by_pss(const std::vector<PssScore>& scores, const PssThresholds& thresholds) {
  LabelAssignment out;
  out.method = LabelMethod::pss_threshold;
  out.thresholds = thresholds;
  for (const auto& s : scores) {
    if (s.total < thresholds.low) out.labeled.push_back({s.subject_id, Label::control});
    else if (s.total > thresholds.high) out.labeled.push_back({s.subject_id, Label::stress});
    else out.excluded.push_back({s.subject_id, ExclusionReason::neutral_band, ""});
  }
  return out;
}

inline std::vector<PssScore> manifest_scores(const SubjectManifest& manifest) {
  std::vector<PssScore> scores;
  for (const auto& e : manifest.entries)
    if (e.pss_items) scores.push_back(score_pss(e.subject_id, *e.pss_items));
  return scores;
}

// Thresholds come from every subject with PSS items; subjects without them
// are excluded as unlabeled. Output order follows the manifest.
inline LabelAssignment label_by_pss(const SubjectManifest& manifest, SdKind kind = SdKind::sample) {
  const auto scores = manifest_scores(manifest);
  const auto thresholds = pss_thresholds(scores, kind);
  const auto partition = label_by_pss(scores, thresholds);

  LabelAssignment out;
  out.method = LabelMethod::pss_threshold;
  out.thresholds = thresholds;
  for (const auto& e : manifest.entries) {
    if (!e.pss_items) {
      out.excluded.push_back({e.subject_id, ExclusionReason::unlabeled, "no PSS items"});
      continue;
    }
    bool placed = false;
    for (const auto& l : partition.labeled)
      if (l.subject_id == e.subject_id) {
        out.labeled.push_back(l);
        placed = true;
      }
    if (!placed) out.excluded.push_back({e.subject_id, ExclusionReason::neutral_band, ""});
  }
  return out;
}

inline LabelAssignment label_by_expert(const SubjectManifest& manifest) {
  LabelAssignment out;
  out.method = LabelMethod::expert;
  for (const auto& e : manifest.entries) {
    switch (e.expert_label) {
      case ExpertLabel::stress: out.labeled.push_back({e.subject_id, Label::stress}); break;
      case ExpertLabel::control: out.labeled.push_back({e.subject_id, Label::control}); break;
      case ExpertLabel::unlabeled: out.excluded.push_back({e.subject_id, ExclusionReason::unlabeled, ""}); break;
    }
  }
  if (out.labeled.empty()) out.warnings.push_back("manifest carries no expert labels; dataset is empty");
  return out;
}

inline LabelAssignment label_subjects(const SubjectManifest& manifest, LabelMethod method,
                                      SdKind kind = SdKind::sample) {
  return method == LabelMethod::expert ? label_by_expert(manifest) : label_by_pss(manifest, kind);
}

// ---------------------------------------------------------------------------

struct LabeledRow {
  std::string subject_id;
  FeatureVector features;
  Label label;
};

struct LabeledDataset {
  LabelMethod method{LabelMethod::pss_threshold};
  std::vector<std::string> feature_names;
  std::vector<LabeledRow> rows;
  std::vector<Exclusion> excluded;

  std::size_t count(Label label) const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.label == label;
    return n;
  }

  std::vector<Label> labels() const {
    std::vector<Label> y;
    for (const auto& r : rows) y.push_back(r.label);
    return y;
  }
};

// Attaches features to labelled subjects. Labelled subjects whose features
// are missing are moved to the excluded list as invalid_features, with the
// reason from `invalid` when one was recorded.
inline LabeledDataset assemble_dataset(const LabelAssignment& labels, const FeatureTable& features,
                                       const std::vector<Exclusion>& invalid = {}) {
  LabeledDataset ds;
  ds.method = labels.method;
  ds.feature_names = features.names;
  for (const auto& s : labels.labeled) {
    if (const auto* fv = features.find(s.subject_id)) {
      ds.rows.push_back({s.subject_id, *fv, s.label});
      continue;
    }
    std::string detail = "no feature vector";
    for (const auto& inv : invalid)
      if (inv.subject_id == s.subject_id) detail = inv.detail;
    ds.excluded.push_back({s.subject_id, ExclusionReason::invalid_features, detail});
  }
  for (const auto& e : labels.excluded) ds.excluded.push_back(e);
  return ds;
}

// Labels CSV: subject_id,label,reason. Excluded subjects have an empty label.
inline std::string labels_to_csv(const LabelAssignment& labels, const std::vector<std::string>& order) {
  std::string out = "subject_id,label,reason\n";
  for (const auto& id : order) {
    for (const auto& l : labels.labeled)
      if (l.subject_id == id) out += id + "," + std::string(to_string(l.label)) + ",\n";
    for (const auto& e : labels.excluded)
      if (e.subject_id == id) out += id + ",," + std::string(to_string(e.reason)) + "\n";
  }
  return out;
}

inline LabelAssignment parse_labels_csv(std::string_view content, LabelMethod method = LabelMethod::pss_threshold) {
  const auto rows = text::lines(content);
  if (rows.empty() || text::trim(rows.front()) != "subject_id,label,reason")
    throw Error(ErrorCode::Parse, "labels CSV header must be subject_id,label,reason");
  LabelAssignment out;
  out.method = method;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = text::split(rows[r], ',');
    if (cells.size() != 3) throw Error(ErrorCode::Parse, "labels CSV row " + std::to_string(r + 1) + " needs 3 fields");
    std::string id(text::trim(cells[0]));
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateSubject, "labels CSV repeats " + id);
    const auto label = text::trim(cells[1]);
    const auto reason = text::trim(cells[2]);
    if (label == "stress") out.labeled.push_back({id, Label::stress});
    else if (label == "control") out.labeled.push_back({id, Label::control});
    else if (label.empty()) {
      ExclusionReason why = ExclusionReason::unlabeled;
      if (reason == "neutral_band") why = ExclusionReason::neutral_band;
      else if (reason == "invalid_features") why = ExclusionReason::invalid_features;
      else if (reason != "unlabeled") throw Error(ErrorCode::Parse, "unknown exclusion reason " + std::string(reason));
      out.excluded.push_back({id, why, ""});
    } else {
      throw Error(ErrorCode::Parse, "unknown label " + std::string(label));
    }
  }
  return out;
}

}  // namespace ltstress
