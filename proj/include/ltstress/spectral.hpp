#pragma once

// Welch power spectral density and band-power integration.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ltstress/error.hpp"
#include "ltstress/text.hpp"

namespace ltstress {

inline constexpr std::size_t kDefaultWindowLen = 128;
inline constexpr double kDefaultOverlap = 0.5;

struct PsdEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // one-sided density, uV^2/Hz
  std::size_t window_len{kDefaultWindowLen};
  double overlap_frac{kDefaultOverlap};
  std::size_t segment_count{0};
  double sample_rate_hz{0.0};

  double resolution_hz() const { return sample_rate_hz / static_cast<double>(window_len); }
  double nyquist_hz() const { return sample_rate_hz / 2.0; }
};

struct BandDefinition {
  std::string name;
  double lo_hz;
  double hi_hz;
};

// Band table in feature-export order. beta and gamma overlap on 25-30 Hz.
inline const std::vector<BandDefinition>& standard_bands() {
  static const std::vector<BandDefinition> bands{
      {"delta", 1.0, 3.0},    {"theta", 4.0, 7.0},     {"slow", 4.0, 13.0}, {"alpha", 8.0, 12.0},
      {"low_beta", 13.0, 17.0}, {"beta", 13.0, 30.0}, {"gamma", 25.0, 43.0},
  };
  return bands;
}

inline const BandDefinition& standard_band(std::string_view name) {
  for (const auto& b : standard_bands())
    if (b.name == name) return b;
  throw Error(ErrorCode::UnknownFeature, "no band named " + std::string(name));
}

// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(len));
  return w;
}

namespace detail {

// FFTW's planner is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t len)
      : len_(len),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * len))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (len / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(len), in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::span<double> input() { return {in_, len_}; }

  // |X_k|^2 for k = 0..len/2.
  void power(std::span<double> out) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k < len_ / 2 + 1; ++k) out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  std::size_t len_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_{};
};

}  // namespace detail

inline std::size_t welch_step(std::size_t window_len, double overlap_frac) {
  const auto overlap = static_cast<std::size_t>(std::llround(overlap_frac * static_cast<double>(window_len)));
  return window_len - std::min(overlap, window_len);
}

// Averaged modified periodogram: Hann window, per-segment mean removal,
// trailing partial segment discarded, one-sided density scaling
// 1 / (fs * sum(w^2)) so that sum(power) * df equals the mean windowed
// segment variance.
inline PsdEstimate welch_psd(std::span<const double> samples, double sample_rate_hz,
                             std::size_t window_len = kDefaultWindowLen, double overlap_frac = kDefaultOverlap) {
  if (!(overlap_frac >= 0.0 && overlap_frac < 1.0))
    throw Error(ErrorCode::BadOverlap, "overlap must lie in [0, 1), got " + text::format_double(overlap_frac));
  if (window_len < 2) throw Error(ErrorCode::TooShort, "window length must be at least 2");
  const std::size_t step = welch_step(window_len, overlap_frac);
  if (step == 0) throw Error(ErrorCode::BadOverlap, "overlap leaves no hop between segments");
  if (samples.size() < window_len)
    throw Error(ErrorCode::TooShort, std::to_string(samples.size()) + " samples is shorter than one window of " +
                                         std::to_string(window_len));
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::BadSampleRate, "sample rate must be positive");

  const auto window = hann_window(window_len);
  double window_energy = 0.0;
  for (double w : window) window_energy += w * w;

  const std::size_t bins = window_len / 2 + 1;
  PsdEstimate psd;
  psd.window_len = window_len;
  psd.overlap_frac = overlap_frac;
  psd.sample_rate_hz = sample_rate_hz;
  psd.segment_count = 1 + (samples.size() - window_len) / step;
  psd.power.assign(bins, 0.0);
  psd.freqs_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    psd.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(window_len);

  detail::RealFft fft(window_len);
  std::vector<double> seg_power(bins);
  for (std::size_t s = 0; s < psd.segment_count; ++s) {
    const auto segment = samples.subspan(s * step, window_len);
    double mean = 0.0;
    for (double v : segment) mean += v;
    mean /= static_cast<double>(window_len);
    auto in = fft.input();
    for (std::size_t n = 0; n < window_len; ++n) in[n] = (segment[n] - mean) * window[n];
    fft.power(seg_power);
    for (std::size_t k = 0; k < bins; ++k) psd.power[k] += seg_power[k];
  }

  const double scale = 1.0 / (sample_rate_hz * window_energy * static_cast<double>(psd.segment_count));
  const bool even = window_len % 2 == 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (even && k == bins - 1);
    psd.power[k] *= unpaired ? scale : 2.0 * scale;
  }
  return psd;
}

// Integral of the PSD over [lo, hi] as the sum of the grid points inside the
// closed band times df. Every bin of a Hann main lobe counts in full, so a
// tone at a band centre keeps all of its power even in a 3 Hz wide band.
inline double band_power(const PsdEstimate& psd, const BandDefinition& band) {
  if (!(band.lo_hz >= 0.0) || !(band.hi_hz <= psd.nyquist_hz()) || !(band.lo_hz < band.hi_hz))
    throw Error(ErrorCode::BandOutOfRange, band.name + " [" + text::format_double(band.lo_hz) + ", " +
                                              text::format_double(band.hi_hz) + "] Hz outside [0, " +
                                              text::format_double(psd.nyquist_hz()) + "]");
  const double slack = 1e-9 * psd.resolution_hz();
  double total = 0.0;
  for (std::size_t i = 0; i < psd.freqs_hz.size(); ++i)
    if (psd.freqs_hz[i] >= band.lo_hz - slack && psd.freqs_hz[i] <= band.hi_hz + slack) total += psd.power[i];
  total *= psd.resolution_hz();
  return total;
}

enum class RgDirection { gamma_over_slow, slow_over_gamma };

inline std::string_view to_string(RgDirection d) {
  return d == RgDirection::gamma_over_slow ? "gamma_over_slow" : "slow_over_gamma";
}

inline RgDirection parse_rg_direction(std::string_view s) {
  if (s == "gamma_over_slow") return RgDirection::gamma_over_slow;
  if (s == "slow_over_gamma") return RgDirection::slow_over_gamma;
  throw Error(ErrorCode::Parse, "rg_direction must be gamma_over_slow or slow_over_gamma");
}

inline double relative_gamma(const std::map<std::string, double>& band_powers,
                             RgDirection direction = RgDirection::gamma_over_slow) {
  const auto slow = band_powers.find("slow");
  const auto gamma = band_powers.find("gamma");
  if (slow == band_powers.end() || gamma == band_powers.end())
    throw Error(ErrorCode::UnknownFeature, "relative gamma needs slow and gamma band powers");
  const double num = direction == RgDirection::gamma_over_slow ? gamma->second : slow->second;
  const double den = direction == RgDirection::gamma_over_slow ? slow->second : gamma->second;
  if (!(den > std::numeric_limits<double>::epsilon()))
    throw Error(ErrorCode::DivisionByZero, "relative gamma denominator " + text::format_double(den));
  return num / den;
}

inline std::string psd_to_csv(const PsdEstimate& psd) {
  std::string out = "freq_hz,power\n";
  for (std::size_t i = 0; i < psd.freqs_hz.size(); ++i)
    out += text::format_double(psd.freqs_hz[i]) + "," + text::format_double(psd.power[i]) + "\n";
  return out;
}

}  // namespace ltstress
