#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ltstress/ingest.hpp"

namespace testutil {

inline std::vector<double> sine(std::size_t n, double fs, double freq, double amplitude, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  return x;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

// Five-channel recording where every channel is produced by `make(channel)`.
template <class F>
ltstress::Recording recording(const std::string& id, std::size_t n, F&& make, double fs = 128.0) {
  ltstress::Recording rec;
  rec.subject_id = id;
  rec.sample_rate_hz = fs;
  for (const auto& ch : ltstress::default_montage()) rec.channels.push_back({ch, make(ch)});
  rec.duration_s = static_cast<double>(n) / fs;
  return rec;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ltstress_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
