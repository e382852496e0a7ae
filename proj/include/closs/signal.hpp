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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "closs/error.hpp"

namespace closs {

inline constexpr int kSampleRate = 16000;

// Mono time-domain signal. Holds y(n), s(n), d(n) and their filtered
// counterparts alike.
struct SignalBuffer {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  SignalBuffer() = default;
  explicit SignalBuffer(std::vector<double> x, int rate = kSampleRate)
      : samples(std::move(x)), sample_rate(rate) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::span<const double> view() const noexcept { return samples; }
};

inline void Validate(const SignalBuffer& x, const std::string& what) {
  Require(x.sample_rate == kSampleRate, ErrorCode::kWrongSampleRate,
          what + ": sample rate must be 16000 Hz, got " +
              std::to_string(x.sample_rate));
  for (double v : x.samples)
    Require(std::isfinite(v), ErrorCode::kNumerical,
            what + ": non-finite sample");
}

inline double MeanPower(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

inline double PowerDb(double power) { return 10.0 * std::log10(power); }

}  // namespace closs
