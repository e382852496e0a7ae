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
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/perceptual.hpp"
#include "closs/signal.hpp"
#include "closs/speech_level.hpp"
#include "closs/stft.hpp"

namespace closs {

struct MetricOptions {
  std::size_t frame_len = 256;
  std::size_t hop = 128;
  std::ptrdiff_t max_lag = 64;
  double ssdr_min_db = -10.0;
  double ssdr_max_db = 30.0;
  // Frames whose clean-speech level is at least the active level minus this
  // margin form the speech-active set.
  double speech_active_margin_db = 35.0;
  double na_frame_cap = 1e12;
  double wlakr_energy_margin_db = 40.0;
  bool wlakr_energy_weighting = true;
  SpeechLevelOptions level;
  StftConfig stft;
};

namespace metric_detail {

inline void RequireEqualLength(std::size_t a, std::size_t b, const char* what) {
  Require(a == b, ErrorCode::kShapeMismatch,
          std::string(what) + ": signals differ in length");
}

inline std::size_t FrameCount(std::size_t n, const MetricOptions& o) {
  return n < o.frame_len ? 0 : (n - o.frame_len) / o.hop + 1;
}

inline double At(std::span<const double> x, std::ptrdiff_t i) {
  return (i >= 0 && i < static_cast<std::ptrdiff_t>(x.size())) ? x[static_cast<std::size_t>(i)]
                                                                : 0.0;
}

}  // namespace metric_detail

// SNR_out - SNR_in, each the P.56 active level of the speech part minus the
// mean power of the noise part.
inline double DeltaSnrDb(std::span<const double> s, std::span<const double> d,
                         std::span<const double> s_tilde, std::span<const double> d_tilde,
                         const SpeechLevelOptions& opt = {}) {
  metric_detail::RequireEqualLength(s.size(), d.size(), "delta_snr");
  metric_detail::RequireEqualLength(s.size(), s_tilde.size(), "delta_snr");
  metric_detail::RequireEqualLength(s.size(), d_tilde.size(), "delta_snr");
  const double pd = MeanPower(d), pdt = MeanPower(d_tilde);
  Require(pd > 0.0 && pdt > 0.0, ErrorCode::kSilentSignal, "delta_snr: silent noise component");
  const double snr_in = MeasureSpeechLevel(s, kSampleRate, opt).level_db - PowerDb(pd);
  const double snr_out = MeasureSpeechLevel(s_tilde, kSampleRate, opt).level_db - PowerDb(pdt);
  return snr_out - snr_in;
}

// Lag in [-max_lag, max_lag] maximizing sum_n ref(n) test(n + lag).
inline std::ptrdiff_t AlignmentLag(std::span<const double> ref, std::span<const double> test,
                                   std::ptrdiff_t max_lag) {
  std::ptrdiff_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n)
      acc += ref[n] * metric_detail::At(test, static_cast<std::ptrdiff_t>(n) + lag);
    if (acc > best_val || (acc == best_val && std::abs(lag) < std::abs(best))) {
      best_val = acc;
      best = lag;
    }
  }
  return best;
}

struct SsdrResult {
  double ssdr_db = 0.0;
  std::ptrdiff_t lag = 0;
  std::vector<std::size_t> active_frames;
  std::vector<double> per_frame_db;  // aligned with active_frames
};

inline SsdrResult Ssdr(std::span<const double> s, std::span<const double> s_tilde,
                       const MetricOptions& o = {}) {
  metric_detail::RequireEqualLength(s.size(), s_tilde.size(), "ssdr");
  SsdrResult out;
  out.lag = AlignmentLag(s, s_tilde, o.max_lag);
  const double level = MeasureSpeechLevel(s, kSampleRate, o.level).level_db;
  const std::size_t frames = metric_detail::FrameCount(s.size(), o);
  double acc = 0.0;
  for (std::size_t l = 0; l < frames; ++l) {
    double es = 0.0, ee = 0.0;
    for (std::size_t i = 0; i < o.frame_len; ++i) {
      const std::size_t n = l * o.hop + i;
      const double e =
          metric_detail::At(s_tilde, static_cast<std::ptrdiff_t>(n) + out.lag) - s[n];
      es += s[n] * s[n];
      ee += e * e;
    }
    if (es <= 0.0 || PowerDb(es / static_cast<double>(o.frame_len)) <
                         level - o.speech_active_margin_db)
      continue;
    const double raw = ee > 0.0 ? PowerDb(es / ee) : std::numeric_limits<double>::infinity();
    const double clamped = std::clamp(raw, o.ssdr_min_db, o.ssdr_max_db);
    out.active_frames.push_back(l);
    out.per_frame_db.push_back(clamped);
    acc += clamped;
  }
  Require(!out.active_frames.empty(), ErrorCode::kPrecondition,
          "ssdr: no speech-active frames");
  out.ssdr_db = acc / static_cast<double>(out.active_frames.size());
  return out;
}

// 10 log10 of the mean over all frames of sum d^2 / sum d~(n+lag)^2.
inline double NaSegDb(std::span<const double> d, std::span<const double> d_tilde,
                      std::ptrdiff_t lag = 0, const MetricOptions& o = {}) {
  metric_detail::RequireEqualLength(d.size(), d_tilde.size(), "na_seg");
  const std::size_t frames = metric_detail::FrameCount(d.size(), o);
  Require(frames > 0, ErrorCode::kPrecondition, "na_seg: signal shorter than one frame");
  double acc = 0.0;
  for (std::size_t l = 0; l < frames; ++l) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < o.frame_len; ++i) {
      const std::size_t n = l * o.hop + i;
      const double t = metric_detail::At(d_tilde, static_cast<std::ptrdiff_t>(n) + lag);
      num += d[n] * d[n];
      den += t * t;
    }
    double ratio;
    if (den > 0.0)
      ratio = std::min(num / den, o.na_frame_cap);
    else
      ratio = num > 0.0 ? o.na_frame_cap : 1.0;
    acc += ratio;
  }
  return PowerDb(acc / static_cast<double>(frames));
}

inline double Kurtosis(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = (v - mean) * (v - mean);
    m2 += c;
    m4 += c * c;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  return m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
}

inline constexpr double kKurtosisFloor = 1e-6;

// Energy-weighted mean over eligible frames of log10(kurt(d~) / kurt(d)).
// Eligible frames carry noise energy within wlakr_energy_margin_db of the
// loudest frame. 0 means the residual noise keeps the amplitude statistics
// of the original noise.
inline double Wlakr(std::span<const double> d, std::span<const double> d_tilde,
                    const MetricOptions& o = {}) {
  metric_detail::RequireEqualLength(d.size(), d_tilde.size(), "wlakr");
  const std::size_t frames = metric_detail::FrameCount(d.size(), o);
  std::vector<double> energy(frames, 0.0);
  double peak = 0.0;
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t i = 0; i < o.frame_len; ++i) {
      const double v = d[l * o.hop + i];
      energy[l] += v * v;
    }
    peak = std::max(peak, energy[l]);
  }
  Require(peak > 0.0, ErrorCode::kPrecondition, "wlakr: no eligible frames (silent noise)");
  const double floor_energy = peak * std::pow(10.0, -o.wlakr_energy_margin_db / 10.0);
  double acc = 0.0, weight_sum = 0.0;
  for (std::size_t l = 0; l < frames; ++l) {
    if (energy[l] < floor_energy) continue;
    const std::span<const double> ref(d.data() + l * o.hop, o.frame_len);
    const std::span<const double> test(d_tilde.data() + l * o.hop, o.frame_len);
    const double k_ref = Kurtosis(ref);
    Require(k_ref >= kKurtosisFloor, ErrorCode::kNumerical,
            "wlakr: reference kurtosis below floor in frame " + std::to_string(l));
    const double k_test = std::max(Kurtosis(test), kKurtosisFloor);
    const double weight = o.wlakr_energy_weighting ? energy[l] : 1.0;
    acc += weight * std::log10(k_test / k_ref);
    weight_sum += weight;
  }
  Require(weight_sum > 0.0, ErrorCode::kPrecondition, "wlakr: no eligible frames");
  return acc / weight_sum;
}

// Mean over frames and one-third-octave bands of the envelope correlation
// between s and s_hat, negatives clipped to zero.
inline double StoiProxy(std::span<const double> s, std::span<const double> s_hat,
                        const MetricOptions& o = {}) {
  metric_detail::RequireEqualLength(s.size(), s_hat.size(), "stoi_proxy");
  const auto ref = Magnitudes(Analyze(s, o.stft));
  const auto est = Magnitudes(Analyze(s_hat, o.stft));
  Require(ref.rows() >= kStoiContextFrames, ErrorCode::kPrecondition,
          "stoi_proxy: signal too short for a 30-frame envelope");
  const auto bands = MakeOctaveBands(o.stft.dft_size);
  const std::size_t nb = bands.bands();
  const std::size_t n = kStoiContextFrames;
  RealMatrix xr(ref.rows(), nb), xe(ref.rows(), nb);
  for (std::size_t l = 0; l < ref.rows(); ++l) {
    const auto a = OctaveCompress(ref.row(l), bands);
    const auto b = OctaveCompress(est.row(l), bands);
    std::copy(a.begin(), a.end(), xr.row(l).begin());
    std::copy(b.begin(), b.end(), xe.row(l).begin());
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t l = n - 1; l < ref.rows(); ++l) {
    for (std::size_t b = 0; b < nb; ++b) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = l + 1 - n; i <= l; ++i) {
        mx += xr(i, b);
        my += xe(i, b);
      }
      mx /= static_cast<double>(n);
      my /= static_cast<double>(n);
      double sxx = 0.0, syy = 0.0, sxy = 0.0, qx = 0.0, qy = 0.0;
      for (std::size_t i = l + 1 - n; i <= l; ++i) {
        const double x = xr(i, b) - mx, y = xe(i, b) - my;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        qx += xr(i, b) * xr(i, b);
        qy += xe(i, b) * xe(i, b);
      }
      const bool flat = sxx <= kFlatEnvelope * qx || syy <= kFlatEnvelope * qy;
      const double corr = flat ? 0.0 : sxy / std::sqrt(sxx * syy);
      acc += std::max(corr, 0.0);
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

// Column layout of the batch table: noise component (delta SNR, NA_seg,
// WLAKR), speech component (SSDR), total (STOI proxy).
struct MetricReport {
  double delta_snr_db = 0.0;
  double ssdr_db = 0.0;
  double na_seg_db = 0.0;
  double wlakr = 0.0;
  double wlakr_abs = 0.0;
  double stoi_proxy = 0.0;            // on the enhanced speech s_hat
  double stoi_proxy_component = 0.0;  // on the filtered speech component s~
  std::ptrdiff_t alignment_lag = 0;
  std::vector<std::size_t> speech_active_frames;
  // Placeholders for scores produced by external PESQ/POLQA tools.
  std::optional<double> pesq_s_tilde;
  std::optional<double> pesq_s_hat;
  std::optional<double> polqa_s_hat;
};

inline MetricReport EvaluateComponents(std::span<const double> s, std::span<const double> d,
                                       std::span<const double> s_hat,
                                       std::span<const double> s_tilde,
                                       std::span<const double> d_tilde,
                                       const MetricOptions& o = {}) {
  MetricReport r;
  r.delta_snr_db = DeltaSnrDb(s, d, s_tilde, d_tilde, o.level);
  const auto ssdr = Ssdr(s, s_tilde, o);
  r.ssdr_db = ssdr.ssdr_db;
  r.alignment_lag = ssdr.lag;
  r.speech_active_frames = ssdr.active_frames;
  r.na_seg_db = NaSegDb(d, d_tilde, ssdr.lag, o);
  r.wlakr = Wlakr(d, d_tilde, o);
  r.wlakr_abs = std::abs(r.wlakr);
  r.stoi_proxy = StoiProxy(s, s_hat, o);
  r.stoi_proxy_component = StoiProxy(s, s_tilde, o);
  return r;
}

// Full white-box evaluation of one mask on time-domain s and d.
inline MetricReport EvaluateMask(const SignalBuffer& s, const SignalBuffer& d,
                                 const RealMatrix& mask, const MetricOptions& o = {}) {
  Require(s.size() == d.size(), ErrorCode::kShapeMismatch, "evaluate: s and d differ in length");
  SignalBuffer y;
  y.samples.resize(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) y.samples[n] = s.samples[n] + d.samples[n];
  const auto ys = Analyze(y, o.stft), ss = Analyze(s, o.stft), ds = Analyze(d, o.stft);
  const auto bundle = ApplyMask(ys, ss, ds, mask);
  const auto t = ComponentsToTime(bundle);
  return EvaluateComponents(s.view(), d.view(), t.s_hat.view(), t.s_tilde.view(),
                            t.d_tilde.view(), o);
}

}  // namespace closs
