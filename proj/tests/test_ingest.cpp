#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ltstress/ingest.hpp"
#include "ltstress/text.hpp"
#include "test_util.hpp"

using namespace ltstress;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ltstress::Error thrown";
  return ErrorCode::Io;
}

std::string csv_with_channels(const std::vector<std::string>& channels, std::size_t rows, double fs = 128.0) {
  std::string out = "time_s";
  for (const auto& c : channels) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    out += text::format_double(static_cast<double>(i) / fs);
    for (std::size_t c = 0; c < channels.size(); ++c) out += "," + text::format_double(std::sin(0.1 * i + c));
    out += "\n";
  }
  return out;
}

std::string manifest_json(std::size_t n) {
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json e;
    e["subject_id"] = "S" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1);
    e["pss_items"] = std::vector<int>{1, 2, 3, 0, 4, 2, 2, 1, 3, 2};
    e["expert_label"] = i < 10 ? "stress" : i < 20 ? "control" : "unlabeled";
    e["recording_path"] = "recordings/x.csv";
    doc.push_back(e);
  }
  return doc.dump();
}

}  // namespace

TEST(Ingest, ThreeMinuteFileHasDuration180) {
  testutil::TempDir dir;
  const auto path = dir / "S01.csv";
  text::write_file(path, csv_with_channels(default_montage(), 23040));
  const auto rec = load_recording(path);
  EXPECT_EQ(rec.sample_count(), 23040u);
  EXPECT_DOUBLE_EQ(rec.sample_rate_hz, 128.0);
  EXPECT_DOUBLE_EQ(rec.duration_s, 180.0);
  EXPECT_EQ(rec.channels.size(), 5u);
}

TEST(Ingest, ChannelsAreReorderedToMontage) {
  testutil::TempDir dir;
  const auto path = dir / "S01.csv";
  text::write_file(path, csv_with_channels({"Pz", "AF4", "AF3", "T8", "T7"}, 512));
  const auto rec = load_recording(path);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(rec.channels[i].name, default_montage()[i]);
}

TEST(Ingest, MissingChannelIsRejected) {
  testutil::TempDir dir;
  const auto path = dir / "S01.csv";
  text::write_file(path, csv_with_channels({"AF3", "T7", "T8", "AF4"}, 512));
  EXPECT_EQ(code_of([&] { load_recording(path); }), ErrorCode::MissingChannel);
}

TEST(Ingest, UnknownAndDuplicateChannelsAreRejected) {
  testutil::TempDir dir;
  text::write_file(dir / "a.csv", csv_with_channels({"AF3", "T7", "Pz", "T8", "AF4", "O1"}, 512));
  EXPECT_EQ(code_of([&] { load_recording(dir / "a.csv"); }), ErrorCode::UnknownChannel);
  text::write_file(dir / "b.csv", csv_with_channels({"AF3", "T7", "Pz", "T8", "AF4", "AF4"}, 512));
  EXPECT_EQ(code_of([&] { load_recording(dir / "b.csv"); }), ErrorCode::UnknownChannel);
}

TEST(Ingest, NanSampleIsRejected) {
  testutil::TempDir dir;
  auto content = csv_with_channels(default_montage(), 512);
  const auto pos = content.find('\n', content.find('\n') + 1);  // end of first data row
  const auto comma = content.rfind(',', pos);
  content.replace(comma + 1, pos - comma - 1, "nan");
  text::write_file(dir / "S01.csv", content);
  EXPECT_EQ(code_of([&] { load_recording(dir / "S01.csv"); }), ErrorCode::NonFiniteSample);
}

TEST(Ingest, RaggedRowIsRejected) {
  testutil::TempDir dir;
  auto content = csv_with_channels(default_montage(), 512);
  content += "4.1,1,2\n";
  text::write_file(dir / "S01.csv", content);
  EXPECT_EQ(code_of([&] { load_recording(dir / "S01.csv"); }), ErrorCode::RaggedChannels);
}

TEST(Ingest, ShortRecordingIsRejected) {
  testutil::TempDir dir;
  text::write_file(dir / "S01.csv", csv_with_channels(default_montage(), 100));
  EXPECT_EQ(code_of([&] { load_recording(dir / "S01.csv"); }), ErrorCode::TooShort);
}

TEST(Ingest, DeclaredRateMismatchIsRejected) {
  testutil::TempDir dir;
  text::write_file(dir / "S01.csv", csv_with_channels(default_montage(), 512, 128.0));
  IngestConfig cfg;
  cfg.sample_rate_hz = 256.0;
  EXPECT_EQ(code_of([&] { load_recording(dir / "S01.csv", cfg); }), ErrorCode::BadSampleRate);
  cfg.sample_rate_hz = 128.5;  // within 1%
  EXPECT_NO_THROW(load_recording(dir / "S01.csv", cfg));
}

TEST(Ingest, SidecarRateIsChecked) {
  testutil::TempDir dir;
  text::write_file(dir / "S01.csv", csv_with_channels(default_montage(), 512, 128.0));
  text::write_file(dir / "S01.json", R"({"sample_rate_hz": 100})");
  EXPECT_EQ(code_of([&] { load_recording(dir / "S01.csv"); }), ErrorCode::BadSampleRate);
}

TEST(Ingest, WriteThenLoadRoundTrips) {
  testutil::TempDir dir;
  auto rec = testutil::recording("S07", 1024, [](const std::string& ch) {
    return testutil::white_noise(1024, std::hash<std::string>{}(ch), 20.0);
  });
  write_recording(rec, dir / "S07.csv");
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(dir / "S07.csv")));
  const auto back = load_recording(dir / "S07.csv");
  EXPECT_EQ(back.subject_id, "S07");
  EXPECT_DOUBLE_EQ(back.sample_rate_hz, 128.0);
  ASSERT_EQ(back.sample_count(), rec.sample_count());
  for (std::size_t c = 0; c < 5; ++c)
    for (std::size_t i = 0; i < rec.sample_count(); ++i)
      EXPECT_NEAR(back.channels[c].samples[i], rec.channels[c].samples[i], 1e-9);
}

TEST(Ingest, InMemoryValidationSetsDuration) {
  auto rec = testutil::recording("S01", 23040, [](const std::string&) { return std::vector<double>(23040, 1.0); });
  rec.duration_s = 0;
  validate_recording(rec, {});
  EXPECT_DOUBLE_EQ(rec.duration_s, 180.0);
  rec.channels[2].samples[7] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { validate_recording(rec, {}); }), ErrorCode::NonFiniteSample);
}

TEST(Manifest, ThirtyThreeEntries) {
  const auto m = parse_manifest(manifest_json(33));
  EXPECT_EQ(m.entries.size(), 33u);
  EXPECT_EQ(m.entries[0].expert_label, ExpertLabel::stress);
  EXPECT_EQ(m.entries[32].expert_label, ExpertLabel::unlabeled);
  ASSERT_TRUE(m.entries[5].pss_items.has_value());
  EXPECT_EQ((*m.entries[5].pss_items)[4], 4);
}

TEST(Manifest, ItemAboveFourIsRejected) {
  auto doc = nlohmann::json::parse(manifest_json(3));
  doc[1]["pss_items"][3] = 5;
  EXPECT_EQ(code_of([&] { parse_manifest(doc.dump()); }), ErrorCode::PssOutOfRange);
  doc[1]["pss_items"][3] = -1;
  EXPECT_EQ(code_of([&] { parse_manifest(doc.dump()); }), ErrorCode::PssOutOfRange);
}

TEST(Manifest, DuplicateSubjectIsRejected) {
  auto doc = nlohmann::json::parse(manifest_json(10));
  doc[9]["subject_id"] = "S07";
  EXPECT_EQ(code_of([&] { parse_manifest(doc.dump()); }), ErrorCode::DuplicateSubject);
}

TEST(Manifest, WrongItemCountIsRejected) {
  auto doc = nlohmann::json::parse(manifest_json(2));
  doc[0]["pss_items"] = std::vector<int>{1, 2, 3};
  EXPECT_EQ(code_of([&] { parse_manifest(doc.dump()); }), ErrorCode::PssWrongArity);
}

TEST(Manifest, MissingPssAndLabelMeansUnlabeled) {
  const auto m = parse_manifest(R"([{"subject_id":"A","recording_path":"a.csv"}])");
  EXPECT_TRUE(m.entries[0].unlabeled());
}

TEST(Manifest, JsonRoundTrip) {
  const auto m = parse_manifest(manifest_json(12));
  const auto back = parse_manifest(manifest_to_json(m));
  ASSERT_EQ(back.entries.size(), m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].subject_id, m.entries[i].subject_id);
    EXPECT_EQ(back.entries[i].pss_items, m.entries[i].pss_items);
    EXPECT_EQ(back.entries[i].expert_label, m.entries[i].expert_label);
    EXPECT_EQ(back.entries[i].recording_path, m.entries[i].recording_path);
  }
}

TEST(Manifest, PathsResolveAgainstManifestDirectory) {
  testutil::TempDir dir;
  text::write_file(dir / "manifest.json", manifest_json(1));
  const auto m = load_manifest(dir / "manifest.json");
  EXPECT_EQ(m.resolve(m.entries[0]), dir.path() / "recordings/x.csv");
}
