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
#include <string>
#include <vector>

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/matrix.hpp"

namespace closs {

enum class MaskInit { kOnes, kZeros, kHalf };

struct OptimizeConfig {
  LossKind loss = LossKind::k2cl;
  LossWeights weights;
  double learning_rate = 1.0;
  std::size_t max_iterations = 2000;
  // Stop once the relative decrease of the objective falls below this.
  double tolerance = 1e-14;
  MaskInit init = MaskInit::kOnes;
  double mask_max = 2.0;
  std::size_t max_halvings = 60;
};

struct OptimizeResult {
  RealMatrix mask;
  std::vector<double> trace;  // objective after each accepted iterate, trace[0] = initial
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected gradient descent on the mask with a diagonal scaling
// 1 / (|Y|^2 + |S|^2 + |D|^2) per bin, which makes the step size
// insensitive to bin energy. A step that raises the objective is halved
// until it does not. The objective is sum_l J_l.
inline OptimizeResult OptimizeMask(const ComponentMagnitudes& c, const LossContext& ctx,
                                   const OptimizeConfig& cfg) {
  Validate(c);
  Require(cfg.learning_rate > 0.0, ErrorCode::kInvalidArgument, "learning rate must be > 0");
  Require(cfg.tolerance > 0.0, ErrorCode::kInvalidArgument, "tolerance must be > 0");
  Validate(cfg.weights, cfg.loss);

  const double init = cfg.init == MaskInit::kOnes ? 1.0 : cfg.init == MaskInit::kHalf ? 0.5 : 0.0;
  OptimizeResult out;
  out.mask = RealMatrix(c.frames(), c.bins(), init);

  RealMatrix scale(c.frames(), c.bins());
  double mean_energy = 0.0;
  for (std::size_t i = 0; i < scale.size(); ++i) {
    const double y = c.noisy.data()[i], s = c.speech.data()[i], d = c.noise.data()[i];
    scale.data()[i] = y * y + s * s + d * d;
    mean_energy += scale.data()[i];
  }
  mean_energy = std::max(mean_energy / static_cast<double>(scale.size()), 1e-300);
  for (double& v : scale.data()) v = 1.0 / (v + 1e-9 * mean_energy);

  auto objective = [&](const LossResult& r) {
    double acc = 0.0;
    for (double v : r.per_frame) acc += v;
    return acc;
  };

  auto current = EvaluateLoss(cfg.loss, c, out.mask, cfg.weights, ctx);
  double value = objective(current);
  out.trace.push_back(value);
  double step = cfg.learning_rate;
  RealMatrix trial(c.frames(), c.bins());

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    Require(std::isfinite(value), ErrorCode::kNumerical,
            "optimize_mask: objective diverged at iteration " + std::to_string(it));
    bool accepted = false;
    double next_value = value;
    LossResult next;
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h) {
      for (std::size_t i = 0; i < trial.size(); ++i) {
        const double v = out.mask.data()[i] - step * scale.data()[i] * current.grad.data()[i];
        trial.data()[i] = std::clamp(v, 0.0, cfg.mask_max);
      }
      next = EvaluateLoss(cfg.loss, c, trial, cfg.weights, ctx);
      next_value = objective(next);
      if (std::isfinite(next_value) && next_value <= value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double decrease = value - next_value;
    std::swap(out.mask, trial);
    current = std::move(next);
    value = next_value;
    out.trace.push_back(value);
    step = std::min(step * 1.5, cfg.learning_rate);
    if (decrease <= cfg.tolerance * std::max(1.0, std::abs(value))) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace closs
