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

#include <cmath>

#include "closs/gradcheck.hpp"
#include "closs/losses.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

namespace closs {
namespace {

ComponentMagnitudes OneBin(double y, double s, double d) {
  return {RealMatrix(1, 1, y), RealMatrix(1, 1, s), RealMatrix(1, 1, d)};
}

ComponentMagnitudes RandomMags(std::uint64_t seed, std::size_t frames = 40, std::size_t k = 256) {
  std::mt19937_64 rng(seed);
  return RandomComponents(frames, k, rng);
}

RealMatrix RandomMaskFor(const ComponentMagnitudes& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return RandomMask(c.frames(), c.bins(), 0.05, 1.5, rng);
}

TEST(Weights, Defaults) {
  const LossWeights w;
  EXPECT_EQ(w.alpha, 0.5);
  EXPECT_EQ(w.lambda1, 0.2);
  EXPECT_EQ(w.lambda2, 0.8);
  EXPECT_EQ(w.theta1, 0.1);
  EXPECT_EQ(w.theta2, 0.0309);
  EXPECT_EQ(w.gamma1, 0.92);
  EXPECT_EQ(w.gamma2, 0.6);
  EXPECT_EQ(w.lpc_order, 16u);
  const auto w3 = DefaultWeights(LossKind::k3cl);
  EXPECT_EQ(w3.alpha, 0.1);
  EXPECT_EQ(w3.beta, 0.8);
}

TEST(Weights, Validation) {
  LossWeights w;
  w.alpha = 0.5;
  w.beta = 0.6;
  EXPECT_THROW(Validate(w, LossKind::k3cl), Error);
  w.alpha = 1.2;
  EXPECT_THROW(Validate(w, LossKind::k2cl), Error);
  LossWeights p;
  p.lambda1 = -0.1;
  EXPECT_THROW(Validate(p, LossKind::kPwPesq), Error);
  EXPECT_THROW(ParseLossKind("l1"), Error);
  for (auto k : kAllLosses) EXPECT_EQ(ParseLossKind(ToString(k)), k);
}

TEST(Mse, HandArithmetic) {
  const auto r = MseLoss(OneBin(2, 1, 1), RealMatrix(1, 1, 1.0));
  EXPECT_EQ(r.per_frame[0], 1.0);
  EXPECT_EQ(r.grad(0, 0), 4.0);
  const auto perfect = MseLoss(OneBin(2, 1, 1), RealMatrix(1, 1, 0.5));
  EXPECT_EQ(perfect.per_frame[0], 0.0);
  EXPECT_EQ(perfect.grad(0, 0), 0.0);
  EXPECT_THROW(MseLoss(OneBin(2, 1, 1), RealMatrix(1, 1, -1.0)), Error);
}

TEST(Cl2, HandArithmetic) {
  EXPECT_EQ(Cl2Loss(OneBin(3, 1, 2), RealMatrix(1, 1, 1.0), 0.5).per_frame[0], 2.0);
  EXPECT_EQ(Cl2Loss(OneBin(3, 1, 2), RealMatrix(1, 1, 0.0), 0.5).per_frame[0], 0.5);
  EXPECT_THROW(Cl2Loss(OneBin(3, 1, 2), RealMatrix(1, 1, 1.0), 1.5), Error);
}

TEST(Cl2, GridSearchOracle) {
  const auto c = OneBin(5, 3, 4);
  double best_m = 0.0, best_j = INFINITY;
  RealMatrix m(1, 1);
  for (int i = 0; i <= 1000000; ++i) {
    m(0, 0) = i * 1e-6;
    const double j = 0.5 * (m(0, 0) * 3 - 3) * (m(0, 0) * 3 - 3) + 0.5 * 16 * m(0, 0) * m(0, 0);
    if (j < best_j) best_j = j, best_m = m(0, 0);
  }
  EXPECT_NEAR(best_m, 0.36, 1e-6);
  EXPECT_NEAR(best_j, 2.88, 1e-9);
  const auto cf = ClosedForm2clMask(c.speech, c.noise, 0.5);
  EXPECT_NEAR(cf(0, 0), 0.36, 1e-15);
  EXPECT_NEAR(Cl2Loss(c, cf, 0.5).per_frame[0], 2.88, 1e-12);
  EXPECT_NEAR(Cl2Loss(c, cf, 0.5).grad(0, 0), 0.0, 1e-12);
}

TEST(ClosedForm, Cases) {
  EXPECT_EQ(ClosedForm2clMask(RealMatrix(1, 1, 2.0), RealMatrix(1, 1, 2.0), 0.5)(0, 0), 0.5);
  EXPECT_EQ(ClosedForm2clMask(RealMatrix(1, 1, 2.0), RealMatrix(1, 1, 0.0), 0.3)(0, 0), 1.0);
  EXPECT_EQ(ClosedForm2clMask(RealMatrix(1, 1, 0.0), RealMatrix(1, 1, 0.0), 0.3)(0, 0), 0.0);
  EXPECT_EQ(ClosedForm2clMask(RealMatrix(1, 1, 2.0), RealMatrix(1, 1, 1.0), 0.0)(0, 0), 1.0);
  EXPECT_EQ(ClosedForm2clMask(RealMatrix(1, 1, 2.0), RealMatrix(1, 1, 1.0), 1.0)(0, 0), 0.0);
}

TEST(ClosedForm, NonincreasingInAlpha) {
  const auto c = RandomMags(2);
  RealMatrix prev = ClosedForm2clMask(c.speech, c.noise, 0.0);
  for (double a = 0.05; a <= 1.0; a += 0.05) {
    const auto m = ClosedForm2clMask(c.speech, c.noise, a);
    for (std::size_t i = 0; i < m.size(); ++i) ASSERT_LE(m.data()[i], prev.data()[i]);
    prev = m;
  }
}

TEST(Cl3, FullbandAttenuationGivesZeroThirdTerm) {
  const auto c = RandomMags(3);
  for (double rho : {0.1, 0.5, 0.9}) {
    const auto r = Cl3Loss(c, RealMatrix(c.frames(), c.bins(), rho), 0.1, 0.8);
    for (double v : r.terms.at("noise_shape")) EXPECT_LT(std::abs(v), 1e-12);
  }
}

TEST(Cl3, PerFrameConstantMaskGivesZeroThirdTerm) {
  const auto c = RandomMags(4);
  RealMatrix m(c.frames(), c.bins());
  for (std::size_t l = 0; l < c.frames(); ++l)
    for (std::size_t k = 0; k < c.bins(); ++k) m(l, k) = 0.1 + 0.02 * double(l);
  const auto r = Cl3Loss(c, m, 0.1, 0.8);
  for (double v : r.terms.at("noise_shape")) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(Cl3, BetaZeroIsCl2) {
  const auto c = RandomMags(5);
  const auto m = RandomMaskFor(c, 6);
  for (double a : {0.0, 0.3, 0.5, 1.0}) {
    const auto r3 = Cl3Loss(c, m, a, 0.0), r2 = Cl2Loss(c, m, a);
    EXPECT_EQ(r3.per_frame, r2.per_frame);
    EXPECT_EQ(r3.grad.data(), r2.grad.data());
  }
}

TEST(Cl3, ZeroNoiseFrameContributesNothing) {
  auto c = RandomMags(7, 3, 16);
  for (double& v : c.noise.row(1)) v = 0.0;
  const auto r = Cl3Loss(c, RealMatrix(3, 9, 0.7), 0.1, 0.8);
  EXPECT_EQ(r.terms.at("noise_shape")[1], 0.0);
  for (double g : r.grad.data()) EXPECT_TRUE(std::isfinite(g));
}

TEST(PwFilt, EqualGammasIsMse) {
  const auto c = RandomMags(8);
  const auto m = RandomMaskFor(c, 9);
  LossWeights w;
  w.gamma1 = w.gamma2 = 0.7;
  const auto ctx = MakeLossContext(LossKind::kPwFilt, c, w, 256);
  const auto a = PwFiltLoss(c, m, ctx.weighting), b = MseLoss(c, m);
  for (std::size_t l = 0; l < c.frames(); ++l)
    EXPECT_NEAR(a.per_frame[l], b.per_frame[l], 1e-10 * std::max(1.0, b.per_frame[l]));
  EXPECT_THROW(PwFiltLoss(c, m, RealMatrix()), Error);
}

TEST(PwFilt, PerfectEstimateIsZero) {
  const auto c = RandomMags(10);
  RealMatrix m(c.frames(), c.bins());
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = c.speech.data()[i] / c.noisy.data()[i];
  const auto ctx = MakeLossContext(LossKind::kPwFilt, c, LossWeights{}, 256);
  for (double v : PwFiltLoss(c, m, ctx.weighting).per_frame) EXPECT_LT(v, 1e-20);
}

TEST(PwPesq, LambdaTwoZeroIsScaledMse) {
  const auto c = RandomMags(11);
  const auto m = RandomMaskFor(c, 12);
  LossWeights w;
  w.lambda2 = 0.0;
  const auto map = MakeLoudnessMap();
  const auto a = PwPesqLoss(c, m, w, map), b = MseLoss(c, m);
  for (std::size_t l = 0; l < c.frames(); ++l)
    EXPECT_NEAR(a.per_frame[l], w.lambda1 * b.per_frame[l], 1e-12 * std::max(1.0, b.per_frame[l]));
}

TEST(PwPesq, PerfectEstimateIsZero) {
  const auto c = RandomMags(13);
  RealMatrix m(c.frames(), c.bins());
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = c.speech.data()[i] / c.noisy.data()[i];
  const auto r = PwPesqLoss(c, m, LossWeights{}, MakeLoudnessMap());
  for (std::size_t l = 0; l < c.frames(); ++l) {
    EXPECT_LT(r.per_frame[l], 1e-20);
    EXPECT_LT(r.terms.at("symmetric")[l], 1e-20);
  }
}

TEST(PwPesq, DistortionMatchesScalarReference) {
  const auto map = MakeLoudnessMap();
  std::vector<double> ref(129), hat(129), big(129);
  for (std::size_t k = 0; k < 129; ++k) {
    ref[k] = 0.05 * (1.3 + std::sin(0.7 * double(k) + 0.31 * 3));
    hat[k] = 0.6 * ref[k] + 0.02;
    big[k] = 40.0 * ref[k];
  }
  const auto lr = LoudnessTransform(ref, map);
  const auto a = PesqFrameDistortion(LoudnessTransform(hat, map), lr, 0.1, 0.0309, map.config);
  EXPECT_NEAR(a.symmetric, oracle::kPesqTermsAttenuated[0], 1e-9);
  EXPECT_EQ(a.asymmetric, oracle::kPesqTermsAttenuated[1]);
  const auto b = PesqFrameDistortion(LoudnessTransform(big, map), lr, 0.1, 0.0309, map.config);
  EXPECT_NEAR(b.symmetric / oracle::kPesqTermsAmplified[0], 1.0, 1e-12);
  EXPECT_NEAR(b.asymmetric / oracle::kPesqTermsAmplified[1], 1.0, 1e-12);
}

TEST(PwStoi, MatchesNumpyReference) {
  const std::size_t frames = 40, bins = 129;
  ComponentMagnitudes c{RealMatrix(frames, bins), RealMatrix(frames, bins), RealMatrix(frames, bins)};
  RealMatrix m(frames, bins);
  for (std::size_t l = 0; l < frames; ++l)
    for (std::size_t k = 0; k < bins; ++k) {
      const double dk = double(k), dl = double(l);
      c.speech(l, k) = 0.05 * (1.3 + std::sin(0.7 * dk + 0.31 * dl));
      c.noisy(l, k) = c.speech(l, k) + 0.03 * (1.0 + std::cos(0.5 * dk + 0.9 * dl));
      c.noise(l, k) = c.noisy(l, k) - c.speech(l, k);
      m(l, k) = 0.5 + 0.4 * std::sin(0.13 * dk * dl);
    }
  const auto r = PwStoiLoss(c, m, MakeOctaveBands());
  ASSERT_EQ(r.first_frame, 29u);
  for (std::size_t l = 29; l < frames; ++l) EXPECT_NEAR(r.per_frame[l], oracle::kStoiFrames[l - 29], 1e-12);
}

TEST(PwStoi, SelfAndAffine) {
  auto c = RandomMags(14);
  RealMatrix m(c.frames(), c.bins());
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = c.speech.data()[i] / c.noisy.data()[i];
  const auto bands = MakeOctaveBands();
  for (std::size_t l = 29; l < c.frames(); ++l) EXPECT_NEAR(PwStoiLoss(c, m, bands).per_frame[l], -1.0, 1e-12);
  for (double& v : m.data()) v *= 0.3;
  for (std::size_t l = 29; l < c.frames(); ++l) EXPECT_NEAR(PwStoiLoss(c, m, bands).per_frame[l], -1.0, 1e-12);
  for (double v : PwStoiLoss(c, RandomMaskFor(c, 3), bands).per_frame) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(PwStoi, Preconditions) {
  const auto c = RandomMags(15, 20);
  EXPECT_THROW(PwStoiLoss(c, RealMatrix(20, 129, 1.0), MakeOctaveBands()), Error);
  // constant envelope: zero variance contributes 0, never NaN
  const auto flat = ComponentMagnitudes{RealMatrix(30, 129, 1.0), RealMatrix(30, 129, 1.0),
                                        RealMatrix(30, 129, 0.0)};
  const auto r = PwStoiLoss(flat, RealMatrix(30, 129, 1.0), MakeOctaveBands());
  EXPECT_EQ(r.per_frame[29], 0.0);
}

TEST(Losses, NonNegativeFrames) {
  const auto c = RandomMags(16);
  const auto m = RandomMaskFor(c, 17);
  for (auto kind : {LossKind::kMse, LossKind::k2cl, LossKind::k3cl, LossKind::kPwFilt, LossKind::kPwPesq}) {
    const auto w = DefaultWeights(kind);
    const auto r = EvaluateLoss(kind, c, m, w, MakeLossContext(kind, c, w, 256));
    for (double v : r.per_frame) EXPECT_GE(v, 0.0);
    for (double g : r.grad.data()) EXPECT_TRUE(std::isfinite(g));
    EXPECT_TRUE(r.grad.same_shape(m));
  }
}

TEST(Losses, TotalIsMeanOfFrames) {
  const auto c = RandomMags(18);
  const auto r = Cl2Loss(c, RandomMaskFor(c, 19), 0.5);
  double acc = 0.0;
  for (double v : r.per_frame) acc += v;
  EXPECT_NEAR(r.total, acc / double(r.per_frame.size()), 1e-12 * acc);
}

class GradientTest : public ::testing::TestWithParam<LossKind> {};

TEST_P(GradientTest, MatchesFiniteDifferences) {
  GradCheckOptions o;
  const auto s = RunGradCheck(GetParam(), 10, 99, o);
  EXPECT_TRUE(s.worst.pass) << ToString(GetParam()) << " rel " << s.worst.max_rel_error
                            << " near-kink " << s.worst.max_rel_error_near_kink;
  EXPECT_LT(s.worst.max_rel_error, 1e-6);
  EXPECT_GT(s.worst.checked, s.worst.excluded);
}

INSTANTIATE_TEST_SUITE_P(AllLosses, GradientTest, ::testing::ValuesIn(kAllLosses),
                         [](const auto& info) {
                           std::string n = ToString(info.param);
                           std::erase(n, '-');
                           return "loss_" + n;
                         });

TEST(GradCheck, DeterministicAndStoiPrecondition) {
  GradCheckOptions o;
  const auto a = RunGradCheck(LossKind::k3cl, 2, 5, o), b = RunGradCheck(LossKind::k3cl, 2, 5, o);
  EXPECT_EQ(a.worst.max_rel_error, b.worst.max_rel_error);
  o.frames = 20;
  EXPECT_THROW(RunGradCheck(LossKind::kPwStoi, 1, 5, o), Error);
}

}  // namespace
}  // namespace closs
