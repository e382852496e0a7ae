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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "closs/closs.hpp"

namespace closs::testing {

// Scratch directory unique to one test, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("closs_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> RandomSignal(std::size_t n, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

// Speech + white noise at the given input SNR.
inline Mixture SpeechInNoise(double snr_db, std::uint64_t seed = 11, double duration_s = 2.0,
                             NoiseKind kind = NoiseKind::kWhite) {
  SyntheticSpeechOptions opt;
  opt.duration_s = duration_s;
  const auto speech = SyntheticSpeech(seed, opt);
  const auto noise = SyntheticNoise(kind, speech.size() + 4000, seed + 1000);
  return MixAtSnr(speech, noise, snr_db, seed);
}

struct Spectra {
  SpectralFrames y, s, d;
  ComponentMagnitudes mags;
};

inline Spectra Analyze(const Mixture& m, const StftConfig& cfg = {}) {
  Spectra out{closs::Analyze(m.noisy, cfg), closs::Analyze(m.speech, cfg),
              closs::Analyze(m.noise, cfg), {}};
  out.mags = MagnitudesOf(out.y, out.s, out.d);
  return out;
}

}  // namespace closs::testing
