#pragma once

#include <numeric>
#include <span>
#include <vector>

#include "ltstress/ingest.hpp"

namespace ltstress {

struct CleanRecording {
  Recording recording;
  std::vector<double> offset_removed;  // per channel, montage order
};

inline double mean_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Subtracts each channel's mean over the whole recording. A second
// correction pass absorbs the rounding left over by the first, so the
// residual mean sits at the floating-point floor.
inline CleanRecording remove_baseline_offset(Recording rec) {
  CleanRecording out;
  out.offset_removed.reserve(rec.channels.size());
  for (auto& ch : rec.channels) {
    const double offset = mean_of(ch.samples);
    for (double& v : ch.samples) v -= offset;
    const double residual = mean_of(ch.samples);
    for (double& v : ch.samples) v -= residual;
    out.offset_removed.push_back(offset + residual);
  }
  out.recording = std::move(rec);
  return out;
}

}  // namespace ltstress
