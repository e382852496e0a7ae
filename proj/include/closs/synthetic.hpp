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
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "closs/error.hpp"
#include "closs/signal.hpp"
#include "closs/speech_level.hpp"

namespace closs {

// Speech-like test material: voiced syllables (harmonic series with a
// gliding pitch under three formant resonances), unvoiced bursts, and pauses.
struct SyntheticSpeechOptions {
  double duration_s = 2.0;
  double active_level_db = -26.0;
  double pitch_min_hz = 90.0;
  double pitch_max_hz = 230.0;
  // White recording floor relative to the active level; keeps pauses from
  // being digitally silent.
  double floor_db = -45.0;
};

inline SignalBuffer SyntheticSpeech(std::uint64_t seed, const SyntheticSpeechOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto total = static_cast<std::size_t>(opt.duration_s * kSampleRate);
  std::vector<double> x(total, 0.0);
  const double fs = kSampleRate;
  const double two_pi = 2.0 * std::numbers::pi;

  std::size_t pos = static_cast<std::size_t>((0.05 + 0.1 * uni(rng)) * fs);
  while (pos < total) {
    const auto len = static_cast<std::size_t>((0.12 + 0.2 * uni(rng)) * fs);
    const bool voiced = uni(rng) < 0.8;
    const double f0_start = opt.pitch_min_hz + (opt.pitch_max_hz - opt.pitch_min_hz) * uni(rng);
    const double f0_end = f0_start * (0.8 + 0.4 * uni(rng));
    const double formants[3] = {300.0 + 600.0 * uni(rng), 900.0 + 1400.0 * uni(rng),
                                2200.0 + 1000.0 * uni(rng)};
    const double bandwidths[3] = {80.0, 120.0, 180.0};
    const double gain = 0.4 + 0.6 * uni(rng);
    double phase = 0.0;
    double lp = 0.0;
    for (std::size_t i = 0; i < len && pos + i < total; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(len);
      const double env = gain * std::sin(std::numbers::pi * t) * std::sin(std::numbers::pi * t);
      double v = 0.0;
      if (voiced) {
        const double f0 = f0_start + (f0_end - f0_start) * t;
        phase += two_pi * f0 / fs;
        for (int h = 1; f0 * h < 7000.0; ++h) {
          const double f = f0 * h;
          double amp = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double q = (f - formants[k]) / bandwidths[k];
            amp += 1.0 / (1.0 + q * q) / (k + 1);
          }
          amp *= 1.0 / std::sqrt(static_cast<double>(h));
          v += amp * std::sin(h * phase);
        }
      } else {
        // high-passed noise burst
        const double w = gauss(rng);
        v = 0.6 * (w - lp);
        lp = 0.7 * lp + 0.3 * w;
      }
      x[pos + i] += env * v;
    }
    pos += len + static_cast<std::size_t>((0.03 + 0.2 * uni(rng)) * fs);
  }
  SignalBuffer out(std::move(x));
  auto normalize = [&] {
    const double level = ActiveSpeechLevelDb(out);
    const double g = std::pow(10.0, (opt.active_level_db - level) / 20.0);
    for (double& v : out.samples) v *= g;
  };
  normalize();
  if (std::isfinite(opt.floor_db)) {
    const double sigma = std::pow(10.0, (opt.active_level_db + opt.floor_db) / 20.0);
    for (double& v : out.samples) v += sigma * gauss(rng);
    normalize();
  }
  return out;
}

enum class NoiseKind { kWhite, kPink, kBabble, kModulated };

inline NoiseKind ParseNoiseKind(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "babble") return NoiseKind::kBabble;
  if (name == "modulated") return NoiseKind::kModulated;
  throw Error(ErrorCode::kInvalidArgument, "unknown noise kind '" + name + "'");
}

// Unit-power noise of the requested colour.
inline SignalBuffer SyntheticNoise(NoiseKind kind, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(length, 0.0);
  switch (kind) {
    case NoiseKind::kWhite:
      for (double& v : x) v = gauss(rng);
      break;
    case NoiseKind::kPink: {
      // Paul Kellet's economy pink filter.
      double b0 = 0.0, b1 = 0.0, b2 = 0.0;
      for (double& v : x) {
        const double w = gauss(rng);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::kBabble: {
      SyntheticSpeechOptions opt;
      opt.duration_s = static_cast<double>(length) / kSampleRate + 0.01;
      for (int talker = 0; talker < 6; ++talker) {
        const auto s = SyntheticSpeech(seed * 7919 + static_cast<std::uint64_t>(talker) + 1, opt);
        for (std::size_t n = 0; n < length; ++n) x[n] += s.samples[n];
      }
      break;
    }
    case NoiseKind::kModulated: {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const double rate = 2.0 + 4.0 * uni(rng);
      double lp = 0.0;
      for (std::size_t n = 0; n < length; ++n) {
        lp = 0.9 * lp + 0.1 * gauss(rng);
        const double t = static_cast<double>(n) / kSampleRate;
        x[n] = lp * (1.2 + std::sin(2.0 * std::numbers::pi * rate * t));
      }
      break;
    }
  }
  const double p = MeanPower(x);
  Require(p > 0.0, ErrorCode::kSilentSignal, "synthetic noise is silent");
  const double g = 1.0 / std::sqrt(p);
  for (double& v : x) v *= g;
  return SignalBuffer(std::move(x));
}

}  // namespace closs
