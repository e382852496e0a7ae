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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/mlp.hpp"

namespace closs {

// Halves the learning rate once the validation loss has failed to improve
// on its best value for `patience` consecutive epochs; the count restarts
// after each halving.
class PlateauHalving {
 public:
  explicit PlateauHalving(double lr, std::size_t patience = 2) : lr_(lr), patience_(patience) {}

  // Returns true when this epoch's result halved the rate.
  bool Observe(double validation_loss) {
    if (validation_loss < best_) {
      best_ = validation_loss;
      stale_ = 0;
      return false;
    }
    if (++stale_ >= patience_) {
      lr_ *= 0.5;
      stale_ = 0;
      return true;
    }
    return false;
  }

  double learning_rate() const noexcept { return lr_; }
  double best() const noexcept { return best_; }

 private:
  double lr_;
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

enum class UpdateRule { kSgd, kAdam };

struct TrainConfig {
  LossKind loss = LossKind::k2cl;
  LossWeights weights;
  std::size_t epochs = 200;
  std::size_t minibatch = 128;
  double learning_rate = 2e-4;
  std::size_t plateau_patience = 2;
  UpdateRule update = UpdateRule::kSgd;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;
  std::size_t dft_size = 256;
  LoudnessConfig loudness;
  // Test hook: replaces the measured validation loss of an epoch.
  std::function<double(std::size_t epoch, double measured)> validation_override;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  bool halved = false;
};

struct TrainResult {
  MlpMaskModel model;
  std::vector<EpochRecord> history;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

struct FrameRef {
  std::size_t utterance = 0;
  std::size_t frame = 0;
};

struct BatchEvaluation {
  double loss = 0.0;       // mean J_l over contributing frames
  std::size_t frames = 0;  // contributing frames
  MlpGradient grad;        // gradient of `loss` w.r.t. the parameters
};

// Splits utterances into training and validation sets with a seeded shuffle.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitDataset(
    std::size_t n, double validation_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(n)));
  if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  else n_val = 0;
  std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

class MaskTrainer {
 public:
  MaskTrainer(const std::vector<TrainingUtterance>& data, const TrainConfig& cfg)
      : data_(data), cfg_(cfg) {
    Validate(cfg.weights, cfg.loss);
    Require(!data.empty(), ErrorCode::kPrecondition, "train: empty dataset");
    Require(cfg.minibatch > 0, ErrorCode::kInvalidArgument, "train: minibatch must be > 0");
    if (cfg.loss == LossKind::kPwPesq) ctx_.loudness = MakeLoudnessMap(cfg.dft_size, cfg.loudness);
    if (cfg.loss == LossKind::kPwStoi) ctx_.octave = MakeOctaveBands(cfg.dft_size);
    for (const auto& u : data) {
      if (cfg.loss == LossKind::kPwFilt)
        Require(u.weighting.same_shape(u.mags.speech), ErrorCode::kPrecondition,
                "train: pw-filt utterance lacks weighting");
      if (cfg.loss == LossKind::kPwStoi)
        Require(u.mags.frames() >= ctx_.stoi_context, ErrorCode::kPrecondition,
                "train: pw-stoi needs utterances of at least 30 frames");
    }
  }

  // Fits normalization on `train` and caches normalized features.
  void Normalize(MlpMaskModel& model, const std::vector<std::size_t>& train) {
    std::vector<const RealMatrix*> sets;
    for (std::size_t i : train) sets.push_back(&data_[i].features);
    model.norm = FitNormalization(sets);
    RefreshFeatures(model);
  }

  void RefreshFeatures(const MlpMaskModel& model) {
    normalized_.clear();
    for (const auto& u : data_) normalized_.push_back(ApplyNormalization(u.features, model.norm));
  }

  // Loss and parameter gradient on a batch. Frame-wise losses accept any
  // frame set; pw-stoi needs consecutive frames of a single utterance.
  BatchEvaluation Evaluate(const MlpMaskModel& model, std::span<const FrameRef> batch,
                           bool with_gradient) const {
    const std::size_t half = data_[batch.front().utterance].mags.bins();
    const std::size_t n = batch.size();
    ComponentMagnitudes mags{RealMatrix(n, half), RealMatrix(n, half), RealMatrix(n, half)};
    LossContext ctx = ctx_;
    if (cfg_.loss == LossKind::kPwFilt) ctx.weighting = RealMatrix(n, half);
    MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.input_width()));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ref = batch[i];
      const auto& u = data_[ref.utterance];
      for (std::size_t b = 0; b < half; ++b) {
        mags.noisy(i, b) = u.mags.noisy(ref.frame, b);
        mags.speech(i, b) = u.mags.speech(ref.frame, b);
        mags.noise(i, b) = u.mags.noise(ref.frame, b);
        if (cfg_.loss == LossKind::kPwFilt) ctx.weighting(i, b) = u.weighting(ref.frame, b);
      }
      GatherContext(normalized_[ref.utterance], ref.frame, model.context,
                    x.row(static_cast<Eigen::Index>(i)).data());
    }
    ForwardCache cache;
    const MatrixXd out = MlpForward(model, x, with_gradient ? &cache : nullptr);
    RealMatrix mask(n, half);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t b = 0; b < half; ++b)
        mask(i, b) = out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
    const auto r = EvaluateLoss(cfg_.loss, mags, mask, cfg_.weights, ctx);
    BatchEvaluation ev;
    ev.frames = n - r.first_frame;
    ev.loss = r.total;
    if (with_gradient) {
      MatrixXd g = MatrixXd::Zero(out.rows(), out.cols());
      const double scale = 1.0 / static_cast<double>(ev.frames);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < half; ++b)
          g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = r.grad(i, b) * scale;
      ev.grad = MlpBackward(model, cache, g);
    }
    return ev;
  }

  // Mean per-frame loss over the given utterances.
  double DatasetLoss(const MlpMaskModel& model, const std::vector<std::size_t>& utts) const {
    double acc = 0.0;
    std::size_t frames = 0;
    for (const auto& batch : Batches(utts, /*shuffle=*/false, nullptr)) {
      const auto ev = Evaluate(model, batch, false);
      acc += ev.loss * static_cast<double>(ev.frames);
      frames += ev.frames;
    }
    return frames ? acc / static_cast<double>(frames) : 0.0;
  }

  // Frame-wise losses: frames pooled across utterances (optionally
  // shuffled), cut into minibatches. pw-stoi: consecutive chunks per
  // utterance, each at least the envelope length.
  std::vector<std::vector<FrameRef>> Batches(const std::vector<std::size_t>& utts, bool shuffle,
                                             std::mt19937_64* rng) const {
    std::vector<std::vector<FrameRef>> out;
    if (cfg_.loss == LossKind::kPwStoi) {
      const std::size_t chunk = std::max(cfg_.minibatch, ctx_.stoi_context);
      for (std::size_t u : utts) {
        const std::size_t frames = data_[u].mags.frames();
        for (std::size_t start = 0; start < frames; start += chunk) {
          std::size_t end = std::min(start + chunk, frames);
          // Fold a short tail into a window that still spans the envelope.
          const std::size_t begin =
              end - start < ctx_.stoi_context ? end - ctx_.stoi_context : start;
          std::vector<FrameRef> b;
          for (std::size_t f = begin; f < end; ++f) b.push_back({u, f});
          out.push_back(std::move(b));
        }
      }
      if (shuffle && rng) std::shuffle(out.begin(), out.end(), *rng);
      return out;
    }
    std::vector<FrameRef> all;
    for (std::size_t u : utts)
      for (std::size_t f = 0; f < data_[u].mags.frames(); ++f) all.push_back({u, f});
    if (shuffle && rng) std::shuffle(all.begin(), all.end(), *rng);
    for (std::size_t start = 0; start < all.size(); start += cfg_.minibatch) {
      const std::size_t end = std::min(start + cfg_.minibatch, all.size());
      out.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(start),
                       all.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
  }

  TrainResult Train(MlpMaskModel model) {
    TrainResult result;
    std::tie(result.train_indices, result.validation_indices) =
        SplitDataset(data_.size(), cfg_.validation_fraction, cfg_.seed);
    const auto& val_set =
        result.validation_indices.empty() ? result.train_indices : result.validation_indices;
    Normalize(model, result.train_indices);

    PlateauHalving schedule(cfg_.learning_rate, cfg_.plateau_patience);
    AdamState adam(model);
    std::mt19937_64 rng(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      const double lr = schedule.learning_rate();
      double acc = 0.0;
      std::size_t frames = 0;
      for (const auto& batch : Batches(result.train_indices, true, &rng)) {
        const auto ev = Evaluate(model, batch, true);
        Require(std::isfinite(ev.loss), ErrorCode::kNumerical,
                "train: non-finite loss in epoch " + std::to_string(epoch) +
                    " (lr " + std::to_string(lr) + ")");
        Apply(model, ev.grad, lr, adam);
        acc += ev.loss * static_cast<double>(ev.frames);
        frames += ev.frames;
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.learning_rate = lr;
      rec.train_loss = frames ? acc / static_cast<double>(frames) : 0.0;
      rec.val_loss = DatasetLoss(model, val_set);
      Require(std::isfinite(rec.val_loss), ErrorCode::kNumerical,
              "train: non-finite validation loss in epoch " + std::to_string(epoch));
      if (cfg_.validation_override) rec.val_loss = cfg_.validation_override(epoch, rec.val_loss);
      rec.halved = schedule.Observe(rec.val_loss);
      result.history.push_back(rec);
    }
    result.model = std::move(model);
    return result;
  }

 private:
  struct AdamState {
    explicit AdamState(const MlpMaskModel& m) {
      for (const auto& l : m.layers) {
        mw.push_back(MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
        vw.push_back(MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
        mb.push_back(VectorXd::Zero(l.bias.size()));
        vb.push_back(VectorXd::Zero(l.bias.size()));
      }
    }
    std::vector<MatrixXd> mw, vw;
    std::vector<VectorXd> mb, vb;
    std::size_t step = 0;
  };

  void Apply(MlpMaskModel& m, const MlpGradient& g, double lr, AdamState& adam) const {
    if (cfg_.update == UpdateRule::kSgd) {
      for (std::size_t i = 0; i < m.layers.size(); ++i) {
        m.layers[i].weights -= lr * g.layers[i].weights;
        m.layers[i].bias -= lr * g.layers[i].bias;
      }
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++adam.step;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      adam.mw[i] = b1 * adam.mw[i] + (1.0 - b1) * g.layers[i].weights;
      adam.vw[i] = b2 * adam.vw[i] + (1.0 - b2) * g.layers[i].weights.cwiseProduct(g.layers[i].weights);
      adam.mb[i] = b1 * adam.mb[i] + (1.0 - b1) * g.layers[i].bias;
      adam.vb[i] = b2 * adam.vb[i] + (1.0 - b2) * g.layers[i].bias.cwiseProduct(g.layers[i].bias);
      m.layers[i].weights.array() -=
          lr * (adam.mw[i].array() / c1) / ((adam.vw[i].array() / c2).sqrt() + eps);
      m.layers[i].bias.array() -=
          lr * (adam.mb[i].array() / c1) / ((adam.vb[i].array() / c2).sqrt() + eps);
    }
  }

  const std::vector<TrainingUtterance>& data_;
  TrainConfig cfg_;
  LossContext ctx_;
  std::vector<RealMatrix> normalized_;
};

inline TrainResult MlpTrain(MlpMaskModel model, const std::vector<TrainingUtterance>& data,
                            const TrainConfig& cfg) {
  MaskTrainer trainer(data, cfg);
  return trainer.Train(std::move(model));
}

inline void WriteHistoryCsv(const std::vector<EpochRecord>& history, std::ostream& os) {
  os << "epoch,train_loss,val_loss,lr\n";
  os.precision(10);
  for (const auto& r : history)
    os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.learning_rate << '\n';
}

}  // namespace closs
