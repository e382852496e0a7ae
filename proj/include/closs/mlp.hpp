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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/matrix.hpp"
#include "closs/stft.hpp"

namespace closs {

using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorXd = Eigen::VectorXd;

inline constexpr std::size_t kContextFrames = 5;
inline constexpr double kFeatureFloor = 1e-10;
inline constexpr double kStdFloor = 1e-8;

// ---------------------------------------------------------------------------
// Input normalization

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dims() const noexcept { return mean.size(); }
};

// Per-column population mean and standard deviation over training frames.
inline NormalizationStats FitNormalization(const std::vector<const RealMatrix*>& sets) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const auto* m : sets) {
    if (m->rows() == 0) continue;
    Require(cols == 0 || m->cols() == cols, ErrorCode::kShapeMismatch,
            "fit_normalization: inconsistent widths");
    cols = m->cols();
    rows += m->rows();
  }
  Require(rows >= 2, ErrorCode::kPrecondition, "fit_normalization: need at least two frames");
  NormalizationStats st;
  st.mean.assign(cols, 0.0);
  st.stddev.assign(cols, 0.0);
  for (const auto* m : sets)
    for (std::size_t l = 0; l < m->rows(); ++l)
      for (std::size_t b = 0; b < cols; ++b) st.mean[b] += (*m)(l, b);
  for (double& v : st.mean) v /= static_cast<double>(rows);
  for (const auto* m : sets)
    for (std::size_t l = 0; l < m->rows(); ++l)
      for (std::size_t b = 0; b < cols; ++b) {
        const double c = (*m)(l, b) - st.mean[b];
        st.stddev[b] += c * c;
      }
  for (double& v : st.stddev) v = std::max(std::sqrt(v / static_cast<double>(rows)), kStdFloor);
  return st;
}

inline NormalizationStats FitNormalization(const RealMatrix& frames) {
  return FitNormalization(std::vector<const RealMatrix*>{&frames});
}

inline RealMatrix ApplyNormalization(const RealMatrix& x, const NormalizationStats& st) {
  Require(x.cols() == st.dims(), ErrorCode::kShapeMismatch,
          "normalization: width does not match statistics");
  RealMatrix out(x.rows(), x.cols());
  for (std::size_t l = 0; l < x.rows(); ++l)
    for (std::size_t b = 0; b < x.cols(); ++b)
      out(l, b) = (x(l, b) - st.mean[b]) / st.stddev[b];
  return out;
}

// log |Y|^2 over the extended k_in bins.
inline RealMatrix LogMagnitudeFeatures(const RealMatrix& extended_mags) {
  RealMatrix out(extended_mags.rows(), extended_mags.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = extended_mags.data()[i];
    out.data()[i] = std::log(m * m + kFeatureFloor);
  }
  return out;
}

// Context window of `context` normalized frames centred on `frame`, edge
// frames replicated. Written frame-major into dst.
inline void GatherContext(const RealMatrix& normalized, std::size_t frame, std::size_t context,
                          double* dst) {
  const auto half = static_cast<std::ptrdiff_t>(context / 2);
  const auto last = static_cast<std::ptrdiff_t>(normalized.rows()) - 1;
  const std::size_t width = normalized.cols();
  for (std::size_t c = 0; c < context; ++c) {
    const std::ptrdiff_t src =
        std::clamp(static_cast<std::ptrdiff_t>(frame) + static_cast<std::ptrdiff_t>(c) - half,
                   std::ptrdiff_t{0}, last);
    const auto row = normalized.row(static_cast<std::size_t>(src));
    std::copy(row.begin(), row.end(), dst + c * width);
  }
}

// ---------------------------------------------------------------------------
// Model

struct DenseLayer {
  MatrixXd weights;  // out x in
  VectorXd bias;
};

struct MlpMaskModel {
  std::size_t k_in = 132;
  std::size_t context = kContextFrames;
  std::vector<std::size_t> hidden = {256, 256};
  double leaky_slope = 0.01;
  std::vector<DenseLayer> layers;
  NormalizationStats norm;

  std::size_t input_width() const noexcept { return k_in * context; }
  std::size_t output_width() const noexcept { return k_in; }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from a seeded
// generator.
inline MlpMaskModel MakeMlpMaskModel(std::uint64_t seed, std::size_t k_in = 132,
                                     std::vector<std::size_t> hidden = {256, 256},
                                     std::size_t context = kContextFrames) {
  MlpMaskModel m;
  m.k_in = k_in;
  m.context = context;
  m.hidden = std::move(hidden);
  std::mt19937_64 rng(seed);
  std::size_t fan_in = m.input_width();
  std::vector<std::size_t> widths = m.hidden;
  widths.push_back(m.output_width());
  for (std::size_t out : widths) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    layer.bias.resize(static_cast<Eigen::Index>(out));
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = dist(rng);
    m.layers.push_back(std::move(layer));
    fan_in = out;
  }
  m.norm.mean.assign(k_in, 0.0);
  m.norm.stddev.assign(k_in, 1.0);
  return m;
}

struct ForwardCache {
  std::vector<MatrixXd> activations;  // input, hidden outputs..., mask
  std::vector<MatrixXd> pre;          // pre-activations per layer
};

// Rows of `input` are normalized context windows; returns masks in (0, 1).
inline MatrixXd MlpForward(const MlpMaskModel& m, const MatrixXd& input,
                           ForwardCache* cache = nullptr) {
  Require(static_cast<std::size_t>(input.cols()) == m.input_width(), ErrorCode::kShapeMismatch,
          "mlp_forward: input width " + std::to_string(input.cols()) + ", expected " +
              std::to_string(m.input_width()));
  Require(!m.layers.empty(), ErrorCode::kPrecondition, "mlp_forward: model has no layers");
  MatrixXd h = input;
  if (cache) {
    cache->activations.assign(1, h);
    cache->pre.clear();
  }
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& layer = m.layers[i];
    MatrixXd z = h * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (cache) cache->pre.push_back(z);
    if (i + 1 < m.layers.size()) {
      h = z.unaryExpr([s = m.leaky_slope](double v) { return v > 0.0 ? v : s * v; });
    } else {
      h = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

// Parameter gradients in the layer layout of the model.
struct MlpGradient {
  std::vector<DenseLayer> layers;
};

// Backpropagates dL/dmask (batch x k_in) through the logistic output and
// the leaky-rectifier hidden layers.
inline MlpGradient MlpBackward(const MlpMaskModel& m, const ForwardCache& cache,
                               const MatrixXd& grad_mask) {
  MlpGradient g;
  g.layers.resize(m.layers.size());
  const MatrixXd& out = cache.activations.back();
  MatrixXd delta = grad_mask.array() * out.array() * (1.0 - out.array());
  for (std::size_t i = m.layers.size(); i-- > 0;) {
    const MatrixXd& input = cache.activations[i];
    g.layers[i].weights = delta.transpose() * input;
    g.layers[i].bias = delta.colwise().sum().transpose();
    if (i == 0) break;
    MatrixXd back = delta * m.layers[i].weights;
    const MatrixXd& z = cache.pre[i - 1];
    delta = back.array() * z.unaryExpr([s = m.leaky_slope](double v) {
                                return v > 0.0 ? 1.0 : s;
                              }).array();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Data

// One utterance prepared for training: magnitudes over K/2+1 bins for the
// loss, log-magnitude features over k_in bins for the network.
struct TrainingUtterance {
  ComponentMagnitudes mags;
  RealMatrix features;   // frames x k_in, not yet normalized
  RealMatrix weighting;  // |W|^2 rows for pw-filt; empty otherwise
};

inline TrainingUtterance PrepareUtterance(const SignalBuffer& noisy, const SignalBuffer& speech,
                                          const SignalBuffer& noise, const StftConfig& cfg,
                                          LossKind loss = LossKind::k2cl,
                                          const LossWeights& w = {}) {
  const auto y = Analyze(noisy, cfg), s = Analyze(speech, cfg), d = Analyze(noise, cfg);
  TrainingUtterance u;
  u.mags = MagnitudesOf(y, s, d);
  u.features = LogMagnitudeFeatures(ExtendBins(y));
  if (loss == LossKind::kPwFilt)
    u.weighting = WeightingFromSpeech(speech.view(), cfg,
                                      WeightingFilterSpec{w.lpc_order, w.gamma1, w.gamma2});
  return u;
}

inline MatrixXd BuildInputs(const MlpMaskModel& m, const RealMatrix& normalized,
                            std::span<const std::size_t> frames) {
  MatrixXd x(static_cast<Eigen::Index>(frames.size()),
             static_cast<Eigen::Index>(m.input_width()));
  for (std::size_t i = 0; i < frames.size(); ++i)
    GatherContext(normalized, frames[i], m.context, x.row(static_cast<Eigen::Index>(i)).data());
  return x;
}

// Full-utterance mask (frames x (K/2+1)) predicted from noisy magnitudes.
inline RealMatrix PredictMask(const MlpMaskModel& m, const SpectralFrames& noisy) {
  const auto feats = ApplyNormalization(LogMagnitudeFeatures(ExtendBins(noisy)), m.norm);
  std::vector<std::size_t> idx(feats.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const MatrixXd out = MlpForward(m, BuildInputs(m, feats, idx));
  const std::size_t half = noisy.config.half_bins();
  RealMatrix mask(feats.rows(), half);
  for (std::size_t l = 0; l < feats.rows(); ++l)
    for (std::size_t b = 0; b < half; ++b)
      mask(l, b) = out(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b));
  return mask;
}

}  // namespace closs
