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
#include <random>

#include "closs/trainer.hpp"
#include "test_util.hpp"

namespace closs {
namespace {

TEST(Mlp, Shapes) {
  const auto m = MakeMlpMaskModel(1);
  ASSERT_EQ(m.layers.size(), 3u);
  EXPECT_EQ(m.input_width(), 660u);
  EXPECT_EQ(m.layers[0].weights.rows(), 256);
  EXPECT_EQ(m.layers[0].weights.cols(), 660);
  EXPECT_EQ(m.layers[2].weights.rows(), 132);
  EXPECT_EQ(m.parameter_count(), 660u * 256 + 256 + 256 * 256 + 256 + 256 * 132 + 132);
}

TEST(Mlp, ZeroWeightsGiveHalf) {
  auto m = MakeMlpMaskModel(1);
  for (auto& l : m.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  const MatrixXd out = MlpForward(m, MatrixXd::Random(4, 660));
  EXPECT_TRUE((out.array() == 0.5).all());
}

TEST(Mlp, SeedDeterminism) {
  const auto a = MakeMlpMaskModel(9), b = MakeMlpMaskModel(9), c = MakeMlpMaskModel(10);
  EXPECT_EQ(a.layers[1].weights, b.layers[1].weights);
  EXPECT_NE(a.layers[1].weights, c.layers[1].weights);
  const double bound = 1.0 / std::sqrt(660.0);
  EXPECT_LE(a.layers[0].weights.cwiseAbs().maxCoeff(), bound);
}

TEST(Mlp, OutputRange) {
  const auto m = MakeMlpMaskModel(2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 3.0);
  MatrixXd x(10000, 660);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  const MatrixXd out = MlpForward(m, x);
  EXPECT_GT(out.minCoeff(), 0.0);
  EXPECT_LT(out.maxCoeff(), 1.0);
  EXPECT_THROW(MlpForward(m, MatrixXd::Zero(2, 10)), Error);
}

TEST(Mlp, NormalizationStats) {
  RealMatrix x(4, 2);
  const double v[] = {1, 10, 2, 10, 3, 10, 4, 10};
  std::copy(std::begin(v), std::end(v), x.data().begin());
  const auto st = FitNormalization(x);
  EXPECT_DOUBLE_EQ(st.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(st.stddev[0], std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(st.stddev[1], kStdFloor);
  const auto n = ApplyNormalization(x, st);
  double mean = 0.0, var = 0.0;
  for (std::size_t l = 0; l < 4; ++l) mean += n(l, 0) / 4.0;
  for (std::size_t l = 0; l < 4; ++l) var += n(l, 0) * n(l, 0) / 4.0;
  EXPECT_NEAR(mean, 0.0, 1e-15);
  EXPECT_NEAR(var, 1.0, 1e-12);
  EXPECT_NEAR(n(0, 1), 0.0, 1e-15);
}

TEST(Mlp, ContextClampsAtEdges) {
  RealMatrix x(3, 1);
  x(0, 0) = 1;
  x(1, 0) = 2;
  x(2, 0) = 3;
  double out[5];
  GatherContext(x, 0, 5, out);
  EXPECT_EQ(std::vector<double>(out, out + 5), (std::vector<double>{1, 1, 1, 2, 3}));
  GatherContext(x, 2, 5, out);
  EXPECT_EQ(std::vector<double>(out, out + 5), (std::vector<double>{1, 2, 3, 3, 3}));
}

// Loss gradient through the network against central differences on a
// handful of parameters of every layer.
class MlpGradientTest : public ::testing::TestWithParam<LossKind> {};

TEST_P(MlpGradientTest, EndToEnd) {
  const LossKind kind = GetParam();
  const auto mix = testing::SpeechInNoise(0.0, 5, 0.6);
  StftConfig cfg;
  const auto w = DefaultWeights(kind);
  std::vector<TrainingUtterance> data{
      PrepareUtterance(mix.noisy, mix.speech, mix.noise, cfg, kind, w)};
  TrainConfig tc;
  tc.loss = kind;
  tc.weights = w;
  tc.minibatch = 40;
  MaskTrainer trainer(data, tc);
  auto model = MakeMlpMaskModel(3, 132, {12, 12});
  trainer.Normalize(model, {0});
  std::vector<FrameRef> batch;
  for (std::size_t f = 10; f < 50; ++f) batch.push_back({0, f});
  const auto ev = trainer.Evaluate(model, batch, true);

  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const double gmax = ev.grad.layers[li].weights.cwiseAbs().maxCoeff();
    for (int t = 0; t < 6; ++t) {
      const bool bias = t % 3 == 2;
      auto& layer = model.layers[li];
      double* param = bias ? layer.bias.data() : layer.weights.data();
      const double* grad = bias ? ev.grad.layers[li].bias.data() : ev.grad.layers[li].weights.data();
      const auto size = bias ? layer.bias.size() : layer.weights.size();
      const auto idx = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(size));
      const double orig = param[idx];
      const double h = 1e-6;
      param[idx] = orig + h;
      const double up = trainer.Evaluate(model, batch, false).loss;
      param[idx] = orig - h;
      const double down = trainer.Evaluate(model, batch, false).loss;
      param[idx] = orig;
      const double fd = (up - down) / (2 * h);
      const double a = grad[idx];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3 * gmax});
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Losses, MlpGradientTest,
                         ::testing::Values(LossKind::kMse, LossKind::k2cl, LossKind::k3cl,
                                           LossKind::kPwFilt, LossKind::kPwStoi),
                         [](const auto& info) {
                           std::string s = ToString(info.param);
                           for (char& ch : s)
                             if (ch == '-') ch = '_';
                           return s;
                         });

TEST(Mlp, PredictMaskShape) {
  const auto mix = testing::SpeechInNoise(5.0, 3, 0.5);
  const auto y = Analyze(mix.noisy, {});
  const auto mask = PredictMask(MakeMlpMaskModel(4), y);
  EXPECT_EQ(mask.rows(), y.frames());
  EXPECT_EQ(mask.cols(), 129u);
}

}  // namespace
}  // namespace closs
