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

#include <sstream>

#include "closs/components.hpp"
#include "test_util.hpp"

namespace closs {
namespace {

struct Fixture {
  Fixture() {
    const auto s = testing::RandomSignal(3000, 1), d = testing::RandomSignal(3000, 2);
    std::vector<double> y(3000);
    for (std::size_t n = 0; n < y.size(); ++n) y[n] = s[n] + d[n];
    sig_s = SignalBuffer(s);
    sig_d = SignalBuffer(d);
    Y = Analyze(std::span<const double>(y), cfg);
    S = Analyze(std::span<const double>(s), cfg);
    D = Analyze(std::span<const double>(d), cfg);
  }
  RealMatrix Random(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealMatrix m(Y.frames(), cfg.half_bins());
    for (double& v : m.data()) v = u(rng);
    return m;
  }
  StftConfig cfg;
  SignalBuffer sig_s, sig_d;
  SpectralFrames Y, S, D;
};

TEST(ApplyMask, IdentityAndZero) {
  Fixture f;
  const auto one = ApplyMask(f.Y, f.S, f.D, RealMatrix(f.Y.frames(), 129, 1.0));
  EXPECT_EQ(one.s_hat.data.data(), f.Y.data.data());
  EXPECT_EQ(one.s_tilde.data.data(), f.S.data.data());
  EXPECT_EQ(one.d_tilde.data.data(), f.D.data.data());
  const auto zero = ApplyMask(f.Y, f.S, f.D, RealMatrix(f.Y.frames(), 129, 0.0));
  for (const auto* x : {&zero.s_hat, &zero.s_tilde, &zero.d_tilde})
    for (const auto& v : x->data.data()) EXPECT_EQ(v, Complex(0.0));
}

TEST(ApplyMask, Additivity) {
  Fixture f;
  const auto b = ApplyMask(f.Y, f.S, f.D, f.Random(3));
  for (std::size_t i = 0; i < b.s_hat.data.size(); ++i)
    EXPECT_LT(std::abs(b.s_hat.data.data()[i] - b.s_tilde.data.data()[i] - b.d_tilde.data.data()[i]),
              1e-12);
  const auto t = ComponentsToTime(b);
  for (std::size_t n = 0; n < t.s_hat.size(); ++n)
    EXPECT_NEAR(t.s_hat.samples[n], t.s_tilde.samples[n] + t.d_tilde.samples[n], 1e-10);
}

TEST(ApplyMask, MirroredMaskEqualsFullMask) {
  Fixture f;
  const auto m = f.Random(4);
  const auto half = ApplyRealMask(f.Y, m);
  for (std::size_t l = 0; l < f.Y.frames(); ++l)
    for (std::size_t k = 0; k < 256; ++k) {
      const double full = m(l, k <= 128 ? k : 256 - k);
      EXPECT_EQ(half.data(l, k), f.Y.data(l, k) * full);
    }
}

TEST(ApplyMask, Errors) {
  Fixture f;
  auto neg = RealMatrix(f.Y.frames(), 129, 1.0);
  neg(0, 0) = -0.1;
  EXPECT_THROW(ApplyMask(f.Y, f.S, f.D, neg), Error);
  auto nan = RealMatrix(f.Y.frames(), 129, 1.0);
  nan(1, 1) = std::nan("");
  EXPECT_THROW(ApplyMask(f.Y, f.S, f.D, nan), Error);
  EXPECT_THROW(ApplyMask(f.Y, f.S, f.D, RealMatrix(2, 129, 1.0)), Error);
  EXPECT_THROW(ApplyMask(f.Y, f.S, f.S, RealMatrix(f.Y.frames(), 129, 1.0)), Error);
  // masks above one are legal
  EXPECT_NO_THROW(ApplyMask(f.Y, f.S, f.D, RealMatrix(f.Y.frames(), 129, 1.7)));
}

TEST(ComponentsToTime, IdentityAndLinearity) {
  Fixture f;
  const auto one = ComponentsToTime(ApplyMask(f.Y, f.S, f.D, RealMatrix(f.Y.frames(), 129, 1.0)));
  const auto half = ComponentsToTime(ApplyMask(f.Y, f.S, f.D, RealMatrix(f.Y.frames(), 129, 0.5)));
  for (std::size_t n = 0; n < f.sig_s.size(); ++n) {
    EXPECT_NEAR(one.s_tilde.samples[n], f.sig_s.samples[n], 1e-10);
    EXPECT_NEAR(half.s_tilde.samples[n], 0.5 * f.sig_s.samples[n], 1e-10);
  }
}

TEST(ComponentsToTime, ScalingSpeechScalesFilteredSpeech) {
  Fixture f;
  auto s3 = f.S, y3 = f.Y;
  for (std::size_t i = 0; i < s3.data.size(); ++i) {
    s3.data.data()[i] *= 3.0;
    y3.data.data()[i] = s3.data.data()[i] + f.D.data.data()[i];
  }
  const auto m = f.Random(5);
  const auto a = ComponentsToTime(ApplyMask(f.Y, f.S, f.D, m));
  const auto b = ComponentsToTime(ApplyMask(y3, s3, f.D, m));
  for (std::size_t n = 0; n < a.s_tilde.size(); ++n)
    EXPECT_NEAR(b.s_tilde.samples[n], 3.0 * a.s_tilde.samples[n], 1e-10);
}

TEST(MaskCsv, RoundTripAndErrors) {
  Fixture f;
  const auto m = f.Random(6);
  std::stringstream ss;
  WriteMaskCsv(m, ss);
  const auto back = ReadMaskCsv(ss);
  EXPECT_EQ(back.data(), m.data());
  std::istringstream bad1("rows,cols\n1,1\n0.5\n");
  EXPECT_THROW(ReadMaskCsv(bad1), Error);
  std::istringstream bad2("frames,bins\n2,2\n0.5,0.5\n");
  EXPECT_THROW(ReadMaskCsv(bad2), Error);
  std::istringstream bad3("frames,bins\n1,2\n0.5,abc\n");
  EXPECT_THROW(ReadMaskCsv(bad3), Error);
}

}  // namespace
}  // namespace closs
