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
#include <cstdint>
#include <random>
#include <vector>

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/matrix.hpp"

namespace closs {

struct GradCheckOptions {
  std::size_t dft_size = 16;
  std::size_t frames = 40;
  double step = 1e-5;
  double tolerance = 1e-5;
  // pw-pesq entries whose one-sided differences disagree by more than
  // near_kink_ratio are checked at kink_tolerance; beyond kink_ratio they are
  // treated as kink points and skipped.
  double kink_tolerance = 1e-4;
  double near_kink_ratio = 1e-6;
  double kink_ratio = 1e-3;
  double mask_lo = 0.05;
  double mask_hi = 1.5;
};

struct GradCheckResult {
  double max_rel_error = 0.0;            // over regular entries
  double max_rel_error_near_kink = 0.0;  // pw-pesq only
  std::size_t checked = 0;
  std::size_t near_kink = 0;
  std::size_t excluded = 0;
  bool pass = true;
};

// Random component magnitudes from complex Gaussian S and D with a random
// per-frame level, |Y| = |S + D|.
inline ComponentMagnitudes RandomComponents(std::size_t frames, std::size_t dft_size,
                                            std::mt19937_64& rng) {
  const std::size_t half = dft_size / 2 + 1;
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> level(-3.0, 1.0);
  ComponentMagnitudes c{RealMatrix(frames, half), RealMatrix(frames, half),
                        RealMatrix(frames, half)};
  for (std::size_t l = 0; l < frames; ++l) {
    const double ls = std::pow(10.0, level(rng));
    const double ld = std::pow(10.0, level(rng));
    for (std::size_t k = 0; k < half; ++k) {
      const std::complex<double> s(ls * g(rng), ls * g(rng));
      const std::complex<double> d(ld * g(rng), ld * g(rng));
      c.speech(l, k) = std::abs(s);
      c.noise(l, k) = std::abs(d);
      c.noisy(l, k) = std::abs(s + d);
    }
  }
  return c;
}

inline RealMatrix RandomMask(std::size_t frames, std::size_t bins, double lo, double hi,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealMatrix m(frames, bins);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Compares LossResult::grad with central differences of sum_l J_l. The sum
// is differenced frame by frame so unaffected frames cancel exactly.
inline GradCheckResult CheckGradient(LossKind kind, const ComponentMagnitudes& c,
                                     const RealMatrix& mask, const LossWeights& w,
                                     const LossContext& ctx, const GradCheckOptions& o = {}) {
  const auto base = EvaluateLoss(kind, c, mask, w, ctx);
  const double gmax = std::max(MaxAbs(base.grad), 1e-300);
  const bool kinks_allowed = kind == LossKind::kPwPesq;
  GradCheckResult out;
  RealMatrix probe = mask;
  auto delta = [&](std::size_t i, double offset) {
    probe.data()[i] = mask.data()[i] + offset;
    const auto r = EvaluateLoss(kind, c, probe, w, ctx);
    probe.data()[i] = mask.data()[i];
    std::vector<double> diff(r.per_frame.size());
    for (std::size_t l = 0; l < diff.size(); ++l) diff[l] = r.per_frame[l] - base.per_frame[l];
    return diff;
  };
  auto sum = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
  };
  const double h = o.step;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const auto p1 = delta(i, h), m1 = delta(i, -h), p2 = delta(i, 2 * h), m2 = delta(i, -2 * h);
    double fd = 0.0;
    for (std::size_t l = 0; l < p1.size(); ++l)
      fd += (8.0 * (p1[l] - m1[l]) - (p2[l] - m2[l])) / (12.0 * h);
    const double analytic = base.grad.data()[i];
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-3 * gmax});
    const double rel = std::abs(analytic - fd) / denom;
    // one-sided slopes over the stencil width
    const double fwd = sum(p2) / (2 * h), bwd = -sum(m2) / (2 * h);
    const double curvature = std::abs(fwd - bwd) / denom;
    if (kinks_allowed && curvature > o.kink_ratio) {
      ++out.excluded;
      continue;
    }
    ++out.checked;
    if (kinks_allowed && curvature > o.near_kink_ratio) {
      ++out.near_kink;
      out.max_rel_error_near_kink = std::max(out.max_rel_error_near_kink, rel);
    } else {
      out.max_rel_error = std::max(out.max_rel_error, rel);
    }
  }
  out.pass = out.max_rel_error < o.tolerance && out.max_rel_error_near_kink < o.kink_tolerance;
  return out;
}

// Loss context for random spectra: the PW-FILT weighting comes from |S| with
// the LPC order capped below the frame's K/2 lags.
inline LossContext GradCheckContext(LossKind kind, const ComponentMagnitudes& c,
                                    const LossWeights& w, std::size_t dft_size) {
  LossWeights capped = w;
  capped.lpc_order = std::min(w.lpc_order, dft_size / 2 - 1);
  return MakeLossContext(kind, c, capped, dft_size);
}

struct GradCheckSummary {
  LossKind kind = LossKind::kMse;
  std::size_t trials = 0;
  GradCheckResult worst;
};

// `trials` random spectrogram/mask pairs for one loss.
inline GradCheckSummary RunGradCheck(LossKind kind, std::size_t trials, std::uint64_t seed,
                                     const GradCheckOptions& o = {},
                                     const LossWeights& w = DefaultWeights(LossKind::k3cl)) {
  Require(kind != LossKind::kPwStoi || o.frames >= kStoiContextFrames, ErrorCode::kPrecondition,
          "gradcheck: pw-stoi needs at least 30 frames");
  GradCheckSummary s;
  s.kind = kind;
  s.trials = trials;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto c = RandomComponents(o.frames, o.dft_size, rng);
    const auto mask = RandomMask(o.frames, o.dft_size / 2 + 1, o.mask_lo, o.mask_hi, rng);
    const auto ctx = GradCheckContext(kind, c, w, o.dft_size);
    const auto r = CheckGradient(kind, c, mask, w, ctx, o);
    s.worst.max_rel_error = std::max(s.worst.max_rel_error, r.max_rel_error);
    s.worst.max_rel_error_near_kink =
        std::max(s.worst.max_rel_error_near_kink, r.max_rel_error_near_kink);
    s.worst.checked += r.checked;
    s.worst.near_kink += r.near_kink;
    s.worst.excluded += r.excluded;
    s.worst.pass = s.worst.pass && r.pass;
  }
  return s;
}

}  // namespace closs
