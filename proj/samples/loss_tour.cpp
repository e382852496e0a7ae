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

// Evaluates every loss on one mixture for the identity mask and for the
// Wiener mask, and optimizes a 3CL mask from scratch.

#include <cstdio>

#include "closs/closs.hpp"

int main() {
  using namespace closs;
  const auto speech = SyntheticSpeech(3);
  const auto noise = SyntheticNoise(NoiseKind::kBabble, speech.size() + kSampleRate, 4);
  const auto mix = MixAtSnr(speech, noise, 5.0, 5);

  const StftConfig cfg;
  const auto c = MagnitudesOf(Analyze(mix.noisy, cfg), Analyze(mix.speech, cfg),
                              Analyze(mix.noise, cfg));
  const RealMatrix ones(c.frames(), c.bins(), 1.0);
  const auto wiener = ClosedForm2clMask(c.speech, c.noise, 0.5);

  std::printf("%-8s %14s %14s\n", "loss", "M = 1", "Wiener");
  for (LossKind kind : kAllLosses) {
    const auto w = DefaultWeights(kind);
    const auto ctx = MakeLossContext(kind, c, w, cfg.dft_size, &cfg, mix.speech.view());
    std::printf("%-8s %14.6g %14.6g\n", ToString(kind), EvaluateLoss(kind, c, ones, w, ctx).total,
                EvaluateLoss(kind, c, wiener, w, ctx).total);
  }

  OptimizeConfig oc;
  oc.loss = LossKind::k3cl;
  oc.weights = DefaultWeights(LossKind::k3cl);
  const auto r = OptimizeMask(c, MakeLossContext(oc.loss, c, oc.weights, cfg.dft_size), oc);
  const auto m = EvaluateMask(mix.speech, mix.noise, r.mask);
  std::printf("\n3cl optimum after %zu iterations: NA_seg %.2f dB, SSDR %.2f dB, |WLAKR| %.4f\n",
              r.iterations, m.na_seg_db, m.ssdr_db, m.wlakr_abs);
  return 0;
}
