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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "closs/optimizer.hpp"
#include "test_util.hpp"

namespace closs {
namespace {

class OptimizerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spectra_ = new testing::Spectra(testing::Analyze(testing::SpeechInNoise(5.0, 21, 0.6)));
  }
  static void TearDownTestSuite() {
    delete spectra_;
    spectra_ = nullptr;
  }
  static const ComponentMagnitudes& mags() { return spectra_->mags; }

  static OptimizeResult Run(LossKind kind, const LossWeights& w) {
    OptimizeConfig cfg;
    cfg.loss = kind;
    cfg.weights = w;
    const auto ctx = MakeLossContext(kind, mags(), w, 256);
    return OptimizeMask(mags(), ctx, cfg);
  }

  static testing::Spectra* spectra_;
};

testing::Spectra* OptimizerTest::spectra_ = nullptr;

double Objective(LossKind kind, const ComponentMagnitudes& c, const RealMatrix& m,
                 const LossWeights& w) {
  const auto r = EvaluateLoss(kind, c, m, w, MakeLossContext(kind, c, w, 256));
  double acc = 0.0;
  for (double v : r.per_frame) acc += v;
  return acc;
}

TEST_F(OptimizerTest, TwoClMatchesClosedForm) {
  for (double alpha : {0.2, 0.5, 0.8}) {
    LossWeights w;
    w.alpha = alpha;
    const auto r = Run(LossKind::k2cl, w);
    EXPECT_TRUE(r.converged);
    const auto want = ClosedForm2clMask(mags().speech, mags().noise, alpha);
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i)
      worst = std::max(worst, std::abs(r.mask.data()[i] - want.data()[i]));
    EXPECT_LT(worst, 1e-4) << "alpha " << alpha;
  }
}

TEST_F(OptimizerTest, MseApproachesMagnitudeRatio) {
  const auto r = Run(LossKind::kMse, {});
  double worst = 0.0;
  for (std::size_t i = 0; i < r.mask.size(); ++i) {
    const double y = mags().noisy.data()[i];
    if (y < 1e-3 * MaxAbs(mags().noisy)) continue;
    const double want = std::clamp(mags().speech.data()[i] / y, 0.0, 2.0);
    worst = std::max(worst, std::abs(r.mask.data()[i] - want));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST_F(OptimizerTest, TraceIsNonIncreasing) {
  for (LossKind kind : {LossKind::k2cl, LossKind::k3cl, LossKind::kPwFilt}) {
    const auto r = Run(kind, DefaultWeights(kind));
    ASSERT_GE(r.trace.size(), 2u);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
    for (double v : r.mask.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 2.0);
    }
  }
}

TEST_F(OptimizerTest, ThreeClImprovesOnTwoClOptimum) {
  const auto w3 = DefaultWeights(LossKind::k3cl);
  const auto r = Run(LossKind::k3cl, w3);
  const auto m2 = ClosedForm2clMask(mags().speech, mags().noise, w3.alpha);
  const double ones = Objective(LossKind::k3cl, mags(), RealMatrix(mags().frames(), mags().bins(), 1.0), w3);
  EXPECT_LE(r.trace.back(), Objective(LossKind::k3cl, mags(), m2, w3) + 1e-12);
  EXPECT_LE(r.trace.back(), ones);
  EXPECT_NEAR(r.trace.front(), ones, 1e-9 * std::abs(ones));
}

TEST_F(OptimizerTest, AlphaControlsAttenuation) {
  LossWeights lo, hi;
  lo.alpha = 0.01;
  hi.alpha = 0.99;
  const auto a = Run(LossKind::k2cl, lo), b = Run(LossKind::k2cl, hi);
  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a.mask.data()) mean_a += v;
  for (double v : b.mask.data()) mean_b += v;
  EXPECT_GT(mean_a, mean_b);
  auto closed_mean = [&](double alpha) {
    double acc = 0.0;
    for (double v : ClosedForm2clMask(mags().speech, mags().noise, alpha).data()) acc += v;
    return acc;
  };
  EXPECT_NEAR(mean_a, closed_mean(0.01), 1e-4 * double(a.mask.size()));
  EXPECT_NEAR(mean_b, closed_mean(0.99), 1e-4 * double(b.mask.size()));
}

TEST_F(OptimizerTest, RejectsBadConfig) {
  OptimizeConfig cfg;
  cfg.learning_rate = 0.0;
  const auto ctx = MakeLossContext(LossKind::k2cl, mags(), {}, 256);
  EXPECT_THROW(OptimizeMask(mags(), ctx, cfg), Error);
  cfg.learning_rate = 1.0;
  cfg.weights.alpha = 1.5;
  EXPECT_THROW(OptimizeMask(mags(), ctx, cfg), Error);
}

}  // namespace
}  // namespace closs
