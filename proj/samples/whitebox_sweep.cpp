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

// Sweeps the 2CL weight over closed-form masks on a synthetic mixture and
// prints the white-box measures for each setting.

#include <cstdio>

#include "closs/closs.hpp"

int main(int argc, char** argv) {
  using namespace closs;
  const double snr_db = argc > 1 ? std::atof(argv[1]) : 0.0;

  const auto speech = SyntheticSpeech(7);
  const auto noise = SyntheticNoise(NoiseKind::kPink, speech.size() + kSampleRate, 8);
  const auto mix = MixAtSnr(speech, noise, snr_db, 9);

  const StftConfig cfg;
  const auto c = MagnitudesOf(Analyze(mix.noisy, cfg), Analyze(mix.speech, cfg),
                              Analyze(mix.noise, cfg));

  std::printf("input SNR %.2f dB, %zu frames\n", mix.measured_snr_db, c.frames());
  std::printf("%6s %9s %9s %9s %9s %9s\n", "alpha", "dSNR", "SSDR", "NA_seg", "|WLAKR|", "stoi");
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto mask = ClosedForm2clMask(c.speech, c.noise, alpha);
    const auto r = EvaluateMask(mix.speech, mix.noise, mask);
    std::printf("%6.1f %9.2f %9.2f %9.2f %9.4f %9.3f\n", alpha, r.delta_snr_db, r.ssdr_db,
                r.na_seg_db, r.wlakr_abs, r.stoi_proxy);
  }
  return 0;
}
