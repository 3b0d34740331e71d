#include <gtest/gtest.h>

#include <set>

#include "ltstress/labeling.hpp"
#include "oracles.hpp"

using namespace ltstress;

namespace {

std::vector<PssScore> scores_from(const std::vector<int>& totals) {
  std::vector<PssScore> out;
  for (std::size_t i = 0; i < totals.size(); ++i) out.push_back({"S" + std::to_string(i + 1), totals[i]});
  return out;
}

// Items summing to `total`, filled greedily.
PssItems items_for(int total) {
  PssItems items{};
  for (auto& v : items) {
    v = std::min(4, total);
    total -= v;
  }
  return items;
}

// The constructed histogram: 9 low, 13 middle, 11 high totals.
const std::vector<int> kHistogramCohort{8,  9,  10, 11, 12, 12, 13, 14, 15, 18, 18, 18, 19, 19, 20, 20, 21,
                                        21, 22, 22, 23, 23, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37};

SubjectManifest manifest_with(std::size_t n_stress, std::size_t n_control, std::size_t n_unlabeled) {
  SubjectManifest m;
  std::size_t i = 0;
  auto add = [&](ExpertLabel label, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k, ++i) {
      ManifestEntry e;
      e.subject_id = "S" + std::to_string(i + 1);
      e.expert_label = label;
      e.pss_items = items_for(kHistogramCohort[i % kHistogramCohort.size()]);
      m.entries.push_back(e);
    }
  };
  add(ExpertLabel::stress, n_stress);
  add(ExpertLabel::control, n_control);
  add(ExpertLabel::unlabeled, n_unlabeled);
  return m;
}

FeatureTable features_for(const SubjectManifest& m) {
  FeatureTable t;
  t.names = {"f1", "f2"};
  double v = 0;
  for (const auto& e : m.entries) t.rows.push_back({e.subject_id, t.names, {v, v + 0.5}}), v += 1;
  return t;
}

}  // namespace

TEST(Pss, ScoreIsItemSum) {
  EXPECT_EQ(score_pss(PssItems{}), 0);
  PssItems fours;
  fours.fill(4);
  EXPECT_EQ(score_pss(fours), 40);
  EXPECT_EQ(score_pss(PssItems{2, 1, 3, 0, 4, 2, 2, 1, 3, 2}), 20);
}

TEST(Pss, PublishedThresholdArithmetic) {
  const auto th = thresholds_from(20.4, 6.14);
  EXPECT_NEAR(th.low, 17.33, 0.005);
  EXPECT_NEAR(th.high, 23.47, 0.005);
  EXPECT_EQ(th.high - th.mean, th.mean - th.low);
}

TEST(Pss, IdenticalScoresAreAllNeutral) {
  const auto scores = scores_from(std::vector<int>(8, 20));
  const auto th = pss_thresholds(scores);
  EXPECT_EQ(th.low, 20.0);
  EXPECT_EQ(th.high, 20.0);
  const auto a = label_by_pss(scores, th);
  EXPECT_TRUE(a.labeled.empty());
  EXPECT_EQ(a.excluded.size(), 8u);
  for (const auto& e : a.excluded) EXPECT_EQ(e.reason, ExclusionReason::neutral_band);
}

TEST(Pss, ThresholdsMatchStatisticsOracle) {
  const auto th = pss_thresholds(scores_from({10, 20, 30}));
  const double sd = oracle::sample_sd({10, 20, 30});
  EXPECT_DOUBLE_EQ(th.mean, 20.0);
  EXPECT_DOUBLE_EQ(th.sd, sd);
  EXPECT_DOUBLE_EQ(th.low, 20.0 - sd / 2);
  EXPECT_DOUBLE_EQ(th.high, 20.0 + sd / 2);
  EXPECT_DOUBLE_EQ(sd, 10.0);

  const auto pop = pss_thresholds(scores_from({10, 20, 30}), SdKind::population);
  EXPECT_NEAR(pop.sd, std::sqrt(200.0 / 3.0), 1e-12);
}

TEST(Pss, TooFewScores) {
  try {
    pss_thresholds(scores_from({12}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientCohort);
  }
}

TEST(Pss, StrictBoundaries) {
  const auto th = thresholds_from(20.4, 6.14);
  const auto a = label_by_pss(scores_from({16, 24, 20}), th);
  ASSERT_EQ(a.labeled.size(), 2u);
  EXPECT_EQ(a.labeled[0].label, Label::control);
  EXPECT_EQ(a.labeled[1].label, Label::stress);
  EXPECT_EQ(a.excluded.at(0).subject_id, "S3");

  const auto exact = thresholds_from(20.0, 8.0);  // (16, 24)
  const auto b = label_by_pss(scores_from({16, 24, 15, 25}), exact);
  EXPECT_EQ(b.excluded.size(), 2u);
  EXPECT_EQ(b.count(Label::control), 1u);
  EXPECT_EQ(b.count(Label::stress), 1u);
}

TEST(Pss, HistogramShapedCohortSplits11_9_13) {
  const auto scores = scores_from(kHistogramCohort);
  const auto a = label_by_pss(scores, pss_thresholds(scores));
  EXPECT_EQ(a.count(Label::stress), 11u);
  EXPECT_EQ(a.count(Label::control), 9u);
  EXPECT_EQ(a.excluded.size(), 13u);
}

TEST(Pss, ConstantShiftMovesThresholdsOnly) {
  const auto base = scores_from(kHistogramCohort);
  auto shifted = base;
  for (auto& s : shifted) s.total += 3;
  const auto t0 = pss_thresholds(base), t1 = pss_thresholds(shifted);
  EXPECT_NEAR(t1.low - t0.low, 3.0, 1e-12);
  EXPECT_NEAR(t1.high - t0.high, 3.0, 1e-12);
  const auto a = label_by_pss(base, t0), b = label_by_pss(shifted, t1);
  ASSERT_EQ(a.labeled.size(), b.labeled.size());
  for (std::size_t i = 0; i < a.labeled.size(); ++i) {
    EXPECT_EQ(a.labeled[i].subject_id, b.labeled[i].subject_id);
    EXPECT_EQ(a.labeled[i].label, b.labeled[i].label);
  }
}

TEST(Pss, PartitionCoversCohortOnce) {
  const auto m = manifest_with(10, 10, 13);
  for (auto method : {LabelMethod::pss_threshold, LabelMethod::expert}) {
    const auto a = label_subjects(m, method);
    std::set<std::string> seen;
    for (const auto& s : a.labeled) EXPECT_TRUE(seen.insert(s.subject_id).second);
    for (const auto& e : a.excluded) EXPECT_TRUE(seen.insert(e.subject_id).second);
    EXPECT_EQ(seen.size(), m.entries.size());
  }
}

TEST(Pss, SubjectWithoutItemsIsUnlabeled) {
  auto m = manifest_with(3, 3, 0);
  m.entries[0].pss_items.reset();
  const auto a = label_by_pss(m);
  bool found = false;
  for (const auto& e : a.excluded)
    if (e.subject_id == "S1") found = e.reason == ExclusionReason::unlabeled;
  EXPECT_TRUE(found);
}

TEST(Expert, TenTenThirteenGivesTwentyRows) {
  const auto m = manifest_with(10, 10, 13);
  const auto a = label_by_expert(m);
  EXPECT_EQ(a.labeled.size(), 20u);
  EXPECT_EQ(a.count(Label::stress), 10u);
  EXPECT_EQ(a.excluded.size(), 13u);
  for (const auto& e : a.excluded) EXPECT_EQ(e.reason, ExclusionReason::unlabeled);
  const auto ds = assemble_dataset(a, features_for(m));
  EXPECT_EQ(ds.rows.size(), 20u);
  EXPECT_EQ(ds.rows.size() + ds.excluded.size(), 33u);
}

TEST(Expert, NoLabelsGivesEmptyDatasetAndWarning) {
  const auto m = manifest_with(0, 0, 7);
  const auto a = label_by_expert(m);
  EXPECT_TRUE(a.labeled.empty());
  EXPECT_FALSE(a.warnings.empty());
  EXPECT_TRUE(assemble_dataset(a, features_for(m)).rows.empty());
}

TEST(Expert, ExpertLabelsWinOverPss) {
  // S1 is labelled stress by the expert but has the lowest PSS total.
  auto m = manifest_with(1, 1, 0);
  m.entries[0].pss_items = items_for(2);
  m.entries[1].pss_items = items_for(39);
  const auto a = label_by_expert(m);
  ASSERT_EQ(a.labeled.size(), 2u);
  EXPECT_EQ(a.labeled[0].label, Label::stress);
  EXPECT_EQ(a.labeled[1].label, Label::control);
  const auto p = label_by_pss(m);
  EXPECT_EQ(p.labeled[0].label, Label::control);
}

TEST(Dataset, MissingFeaturesBecomeInvalid) {
  const auto m = manifest_with(3, 3, 0);
  auto f = features_for(m);
  f.rows.erase(f.rows.begin() + 1);
  const auto ds = assemble_dataset(label_by_expert(m), f, {{"S2", ExclusionReason::invalid_features, "DivisionByZero"}});
  EXPECT_EQ(ds.rows.size(), 5u);
  ASSERT_EQ(ds.excluded.size(), 1u);
  EXPECT_EQ(ds.excluded[0].reason, ExclusionReason::invalid_features);
  EXPECT_NE(ds.excluded[0].detail.find("DivisionByZero"), std::string::npos);
}

TEST(LabelsCsv, RoundTrip) {
  const auto m = manifest_with(4, 4, 3);
  const auto a = label_by_expert(m);
  std::vector<std::string> order;
  for (const auto& e : m.entries) order.push_back(e.subject_id);
  const auto csv = labels_to_csv(a, order);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "subject_id,label,reason");
  const auto back = parse_labels_csv(csv, LabelMethod::expert);
  ASSERT_EQ(back.labeled.size(), a.labeled.size());
  for (std::size_t i = 0; i < a.labeled.size(); ++i) {
    EXPECT_EQ(back.labeled[i].subject_id, a.labeled[i].subject_id);
    EXPECT_EQ(back.labeled[i].label, a.labeled[i].label);
  }
  EXPECT_EQ(back.excluded.size(), 3u);
}
