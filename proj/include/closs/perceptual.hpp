// Copyright 2026 The closs Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "closs/error.hpp"
#include "closs/matrix.hpp"
#include "closs/signal.hpp"
#include "closs/stft.hpp"

namespace closs {

// ---------------------------------------------------------------------------
// Linear prediction

// Predictor convention: x(n) ~ sum_i a(i) x(n - i), i = 1..order, so the
// inverse filter is 1 - A(z).
struct LpcResult {
  std::vector<double> coeffs;      // a(1..order) stored at [0..order-1]
  std::vector<double> reflection;  // k(1..order)
  double residual = 0.0;           // final prediction error power
};

inline LpcResult LevinsonDurbin(std::span<const double> autocorr, std::size_t order) {
  Require(autocorr.size() > order, ErrorCode::kInvalidArgument,
          "levinson: need order+1 autocorrelation lags");
  LpcResult out;
  out.coeffs.assign(order, 0.0);
  out.reflection.assign(order, 0.0);
  double err = autocorr[0];
  if (!(err > 0.0)) return out;  // silent frame: flat filter
  std::vector<double> prev(order, 0.0);
  for (std::size_t i = 0; i < order; ++i) {
    double acc = autocorr[i + 1];
    for (std::size_t j = 0; j < i; ++j) acc -= out.coeffs[j] * autocorr[i - j];
    const double k = acc / err;
    out.reflection[i] = k;
    prev = out.coeffs;
    out.coeffs[i] = k;
    for (std::size_t j = 0; j < i; ++j) out.coeffs[j] = prev[j] - k * prev[i - 1 - j];
    err *= (1.0 - k * k);
    if (!(err > 0.0)) break;
  }
  out.residual = err;
  return out;
}

inline constexpr double kLagZeroCorrection = 1.0 + 1e-9;

// Hann-windowed autocorrelation method with white-noise correction on lag 0.
inline LpcResult LpcFromFrame(std::span<const double> frame, std::size_t order) {
  Require(!frame.empty(), ErrorCode::kInvalidArgument, "lpc: empty frame");
  const auto w = PeriodicHann(frame.size());
  std::vector<double> x(frame.size());
  for (std::size_t n = 0; n < frame.size(); ++n) x[n] = w[n] * frame[n];
  std::vector<double> r(order + 1, 0.0);
  for (std::size_t lag = 0; lag <= order && lag < x.size(); ++lag)
    for (std::size_t n = lag; n < x.size(); ++n) r[lag] += x[n] * x[n - lag];
  r[0] *= kLagZeroCorrection;
  return LevinsonDurbin(r, order);
}

// Same analysis from a windowed frame's half-spectrum magnitudes (circular
// autocorrelation via the inverse DFT of the power spectrum).
inline LpcResult LpcFromMagnitudes(std::span<const double> half_mags, std::size_t dft_size,
                                   std::size_t order) {
  Require(half_mags.size() == dft_size / 2 + 1, ErrorCode::kShapeMismatch,
          "lpc: magnitude frame must have K/2+1 bins");
  std::vector<double> r(order + 1, 0.0);
  const double k_total = static_cast<double>(dft_size);
  for (std::size_t lag = 0; lag <= order; ++lag) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dft_size; ++k) {
      const std::size_t src = k <= dft_size / 2 ? k : dft_size - k;
      const double p = half_mags[src] * half_mags[src];
      acc += p * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * lag) / k_total);
    }
    r[lag] = acc / k_total;
  }
  r[0] *= kLagZeroCorrection;
  return LevinsonDurbin(r, order);
}

// |W(k)|^2 for k = 0..K/2 with
// W(z) = (1 - A(z/gamma1)) / (1 - A(z/gamma2)).
inline std::vector<double> WeightingResponse(std::span<const double> coeffs, double gamma1,
                                             double gamma2, std::size_t dft_size) {
  std::vector<double> out(dft_size / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> num = 1.0;
    std::complex<double> den = 1.0;
    double g1 = 1.0;
    double g2 = 1.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      g1 *= gamma1;
      g2 *= gamma2;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * (i + 1)) /
                           static_cast<double>(dft_size);
      const auto z = std::polar(1.0, phase);
      num -= coeffs[i] * g1 * z;
      den -= coeffs[i] * g2 * z;
    }
    Require(std::abs(den) >= 1e-12, ErrorCode::kNumerical,
            "weighting filter denominator vanishes at bin " + std::to_string(k));
    out[k] = std::norm(num) / std::norm(den);
  }
  return out;
}

struct WeightingFilterSpec {
  std::size_t lpc_order = 16;
  double gamma1 = 0.92;
  double gamma2 = 0.6;
};

// Per-frame |W_l(k)|^2 from the clean speech signal, framed exactly as the
// STFT frames it.
inline RealMatrix WeightingFromSpeech(std::span<const double> speech, const StftConfig& cfg,
                                      const WeightingFilterSpec& spec) {
  Validate(cfg);
  const std::size_t frames = FrameCount(speech.size(), cfg);
  const std::size_t head = cfg.head_padding();
  RealMatrix out(frames, cfg.half_bins());
  std::vector<double> buf(cfg.dft_size);
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t n = 0; n < cfg.dft_size; ++n) {
      const std::size_t p = l * cfg.hop + n;
      buf[n] = (p >= head && p - head < speech.size()) ? speech[p - head] : 0.0;
    }
    const auto lpc = LpcFromFrame(buf, spec.lpc_order);
    const auto w = WeightingResponse(lpc.coeffs, spec.gamma1, spec.gamma2, cfg.dft_size);
    std::copy(w.begin(), w.end(), out.row(l).begin());
  }
  return out;
}

// Per-frame |W_l(k)|^2 when only clean-speech magnitudes are at hand.
inline RealMatrix WeightingFromSpeechMagnitudes(const RealMatrix& speech_mags,
                                                std::size_t dft_size,
                                                const WeightingFilterSpec& spec) {
  RealMatrix out(speech_mags.rows(), speech_mags.cols());
  for (std::size_t l = 0; l < speech_mags.rows(); ++l) {
    const auto lpc = LpcFromMagnitudes(speech_mags.row(l), dft_size, spec.lpc_order);
    const auto w = WeightingResponse(lpc.coeffs, spec.gamma1, spec.gamma2, dft_size);
    std::copy(w.begin(), w.end(), out.row(l).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-third octave bands

struct OctaveBandMap {
  std::vector<std::size_t> lo;  // first bin of each band
  std::vector<std::size_t> hi;  // one past the last bin
  std::vector<double> center_hz;
  std::size_t half_bins = 0;

  std::size_t bands() const noexcept { return lo.size(); }
};

// Centers at lowest_hz * 2^(b/3), edges at +-1/6 octave rounded to the
// nearest bin. Bands that round empty are widened by one bin; bands that no
// longer fit below K/2 are dropped (only happens for small K).
inline OctaveBandMap MakeOctaveBands(std::size_t dft_size = 256, int sample_rate = kSampleRate,
                                     std::size_t count = 15, double lowest_hz = 150.0) {
  Require(sample_rate == kSampleRate, ErrorCode::kWrongSampleRate,
          "octave bands: sample rate must be 16000 Hz");
  OctaveBandMap map;
  map.half_bins = dft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(dft_size);
  const std::size_t top = dft_size / 2;
  std::size_t next = 1;
  for (std::size_t b = 0; b < count; ++b) {
    const double fc = lowest_hz * std::pow(2.0, static_cast<double>(b) / 3.0);
    const auto lo_edge = static_cast<std::size_t>(std::lround(fc * std::pow(2.0, -1.0 / 6.0) / bin_hz));
    const auto hi_edge = static_cast<std::size_t>(std::lround(fc * std::pow(2.0, 1.0 / 6.0) / bin_hz));
    const std::size_t lo = std::max(next, lo_edge);
    const std::size_t hi = std::min(std::max(hi_edge, lo + 1), top + 1);
    if (lo > top || hi <= lo) break;
    map.lo.push_back(lo);
    map.hi.push_back(hi);
    map.center_hz.push_back(fc);
    next = hi;
  }
  return map;
}

inline std::vector<double> OctaveCompress(std::span<const double> mags,
                                          const OctaveBandMap& map) {
  Require(mags.size() == map.half_bins, ErrorCode::kShapeMismatch,
          "octave_compress: frame width does not match band map");
  std::vector<double> out(map.bands());
  for (std::size_t b = 0; b < map.bands(); ++b) {
    double acc = 0.0;
    for (std::size_t k = map.lo[b]; k < map.hi[b]; ++k) acc += mags[k] * mags[k];
    out[b] = std::sqrt(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simplified loudness model

// Band powers on a Bark grid mapped through Zwicker's power law above an
// absolute hearing threshold. Also carries the distortion constants of the
// PESQ-style loss.
struct LoudnessConfig {
  int version = 1;
  std::size_t band_count = 42;
  double exponent = 0.23;
  double scale = 100.0;
  // Threshold power at the most sensitive frequency; other bands follow the
  // Terhardt threshold-in-quiet curve relative to it.
  double threshold_power = 1e-4;
  double masking_fraction = 0.25;
  double asymmetry_offset = 50.0;
  double asymmetry_exponent = 1.2;
  double asymmetry_floor = 3.0;
  double asymmetry_cap = 12.0;
};

struct LoudnessMap {
  LoudnessConfig config;
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<double> center_hz;
  std::vector<double> threshold;  // absolute threshold power per band
  std::size_t half_bins = 0;

  std::size_t bands() const noexcept { return lo.size(); }
};

inline double HzToBark(double hz) {
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan((hz / 7500.0) * (hz / 7500.0));
}

inline double BarkToHz(double bark) {
  double lo = 0.0, hi = 48000.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (HzToBark(mid) < bark ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double HearingThresholdDb(double hz) {
  const double f = std::max(hz, 20.0) / 1000.0;
  return 3.64 * std::pow(f, -0.8) - 6.5 * std::exp(-0.6 * (f - 3.3) * (f - 3.3)) +
         1e-3 * f * f * f * f;
}

inline LoudnessMap MakeLoudnessMap(std::size_t dft_size = 256, const LoudnessConfig& cfg = {},
                                   int sample_rate = kSampleRate) {
  Require(cfg.band_count > 0 && cfg.exponent > 0.0 && cfg.threshold_power > 0.0,
          ErrorCode::kInvalidArgument, "loudness config out of range");
  LoudnessMap map;
  map.config = cfg;
  map.half_bins = dft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(dft_size);
  const std::size_t top = dft_size / 2;
  const double z_lo = HzToBark(0.5 * bin_hz);
  const double z_hi = HzToBark(0.5 * sample_rate);
  const double min_db = HearingThresholdDb(3300.0);
  std::size_t next = 1;
  for (std::size_t b = 0; b < cfg.band_count; ++b) {
    const double z1 = z_lo + (z_hi - z_lo) * static_cast<double>(b + 1) /
                                 static_cast<double>(cfg.band_count);
    const auto edge = static_cast<std::size_t>(std::lround(BarkToHz(z1) / bin_hz));
    const std::size_t lo = next;
    const std::size_t hi = b + 1 == cfg.band_count ? top + 1
                                                   : std::min(std::max(edge, lo + 1), top + 1);
    if (lo > top || hi <= lo) break;
    map.lo.push_back(lo);
    map.hi.push_back(hi);
    const double fc = 0.5 * (static_cast<double>(lo) + static_cast<double>(hi - 1)) * bin_hz;
    map.center_hz.push_back(fc);
    map.threshold.push_back(cfg.threshold_power *
                            std::pow(10.0, (HearingThresholdDb(fc) - min_db) / 10.0));
    next = hi;
  }
  // Bins left over after an early stop belong to the last band.
  if (!map.hi.empty()) map.hi.back() = top + 1;
  return map;
}

inline std::vector<double> BandPowers(std::span<const double> mags, const LoudnessMap& map) {
  Require(mags.size() == map.half_bins, ErrorCode::kShapeMismatch,
          "loudness: frame width does not match loudness map");
  std::vector<double> out(map.bands());
  for (std::size_t b = 0; b < map.bands(); ++b) {
    double acc = 0.0;
    for (std::size_t k = map.lo[b]; k < map.hi[b]; ++k) acc += mags[k] * mags[k];
    out[b] = acc;
  }
  return out;
}

// Zwicker law: scale (P0/0.5)^g ((0.5 + 0.5 P/P0)^g - 1), zero at or below
// the threshold P0.
inline double PowerToLoudness(double power, double threshold, const LoudnessConfig& cfg) {
  if (power <= threshold) return 0.0;
  const double g = cfg.exponent;
  return cfg.scale * std::pow(threshold / 0.5, g) *
         (std::pow(0.5 + 0.5 * power / threshold, g) - 1.0);
}

inline double PowerToLoudnessSlope(double power, double threshold, const LoudnessConfig& cfg) {
  if (power <= threshold) return 0.0;
  const double g = cfg.exponent;
  return cfg.scale * std::pow(threshold / 0.5, g) * g *
         std::pow(0.5 + 0.5 * power / threshold, g - 1.0) * 0.5 / threshold;
}

inline std::vector<double> LoudnessTransform(std::span<const double> mags,
                                             const LoudnessMap& map) {
  auto p = BandPowers(mags, map);
  for (std::size_t b = 0; b < p.size(); ++b)
    p[b] = PowerToLoudness(p[b], map.threshold[b], map.config);
  return p;
}

}  // namespace closs
