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
#include <span>
#include <vector>

#include "closs/error.hpp"
#include "closs/signal.hpp"

namespace closs {

// Active speech level after ITU-T P.56 method B.
struct SpeechLevelOptions {
  double time_constant_s = 0.03;
  double hangover_s = 0.2;
  double margin_db = 15.9;
  // Activity thresholds are spaced threshold_step_db apart and span
  // threshold_range_db below the signal peak.
  double threshold_step_db = 1.0;
  double threshold_range_db = 100.0;
};

struct SpeechLevel {
  double level_db = 0.0;         // 10 log10 of the active mean-square power
  double activity = 0.0;         // fraction of samples judged active
  double threshold_db = 0.0;     // interpolated activity threshold (amplitude dB)
};

inline SpeechLevel MeasureSpeechLevel(std::span<const double> x, int sample_rate,
                                      const SpeechLevelOptions& opt = {}) {
  Require(!x.empty(), ErrorCode::kSilentSignal, "active speech level: empty signal");
  double peak = 0.0;
  double energy = 0.0;
  for (double v : x) {
    peak = std::max(peak, std::abs(v));
    energy += v * v;
  }
  Require(energy > 0.0 && peak > 0.0, ErrorCode::kSilentSignal,
          "active speech level: silent signal");

  const double g = std::exp(-1.0 / (sample_rate * opt.time_constant_s));
  const auto hangover =
      static_cast<std::size_t>(std::lround(opt.hangover_s * sample_rate));
  const auto n_thr = static_cast<std::size_t>(
                         std::floor(opt.threshold_range_db / opt.threshold_step_db)) + 1;

  // Ascending thresholds, the last one at the peak amplitude.
  std::vector<double> thr(n_thr);
  for (std::size_t i = 0; i < n_thr; ++i) {
    const double db = -opt.threshold_step_db * static_cast<double>(n_thr - 1 - i);
    thr[i] = peak * std::pow(10.0, db / 20.0);
  }

  std::vector<std::size_t> active(n_thr, 0);
  std::vector<std::size_t> hang(n_thr, hangover);
  double p = 0.0;
  double q = 0.0;
  for (double v : x) {
    p = g * p + (1.0 - g) * std::abs(v);
    q = g * q + (1.0 - g) * p;
    for (std::size_t i = 0; i < n_thr; ++i) {
      if (q >= thr[i]) {
        ++active[i];
        hang[i] = 0;
      } else if (hang[i] < hangover) {
        ++active[i];
        ++hang[i];
      }
    }
  }

  const double total = static_cast<double>(x.size());
  auto level_at = [&](std::size_t i) {
    return PowerDb(energy / static_cast<double>(active[i]));
  };
  auto excess_at = [&](std::size_t i) {
    return level_at(i) - 20.0 * std::log10(thr[i]);
  };

  SpeechLevel out;
  std::size_t prev = n_thr;
  for (std::size_t i = 0; i < n_thr; ++i) {
    if (active[i] == 0) break;
    const double excess = excess_at(i);
    if (excess <= opt.margin_db) {
      if (prev == n_thr) {
        out.level_db = level_at(i);
        out.threshold_db = 20.0 * std::log10(thr[i]);
        out.activity = static_cast<double>(active[i]) / total;
        return out;
      }
      const double e0 = excess_at(prev);
      const double t = (e0 - opt.margin_db) / (e0 - excess);
      const double a0 = level_at(prev);
      out.level_db = a0 + t * (level_at(i) - a0);
      const double c0 = 20.0 * std::log10(thr[prev]);
      out.threshold_db = c0 + t * (20.0 * std::log10(thr[i]) - c0);
      out.activity = std::pow(10.0, (PowerDb(energy / total) - out.level_db) / 10.0);
      return out;
    }
    prev = i;
  }
  // Margin never reached: fall back to the highest threshold with activity.
  Require(prev != n_thr, ErrorCode::kSilentSignal,
          "active speech level: no active samples");
  out.level_db = level_at(prev);
  out.threshold_db = 20.0 * std::log10(thr[prev]);
  out.activity = static_cast<double>(active[prev]) / total;
  return out;
}

inline double ActiveSpeechLevelDb(const SignalBuffer& x,
                                  const SpeechLevelOptions& opt = {}) {
  return MeasureSpeechLevel(x.view(), x.sample_rate, opt).level_db;
}

}  // namespace closs
