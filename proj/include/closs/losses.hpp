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
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/matrix.hpp"
#include "closs/perceptual.hpp"

namespace closs {

enum class LossKind { kMse, k2cl, k3cl, kPwFilt, kPwPesq, kPwStoi };

inline const char* ToString(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::k2cl: return "2cl";
    case LossKind::k3cl: return "3cl";
    case LossKind::kPwFilt: return "pw-filt";
    case LossKind::kPwPesq: return "pw-pesq";
    case LossKind::kPwStoi: return "pw-stoi";
  }
  return "unknown";
}

inline LossKind ParseLossKind(const std::string& name) {
  for (auto kind : {LossKind::kMse, LossKind::k2cl, LossKind::k3cl, LossKind::kPwFilt,
                    LossKind::kPwPesq, LossKind::kPwStoi})
    if (name == ToString(kind)) return kind;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss '" + name + "'");
}

inline constexpr LossKind kAllLosses[] = {LossKind::kMse,    LossKind::k2cl,
                                          LossKind::k3cl,    LossKind::kPwFilt,
                                          LossKind::kPwPesq, LossKind::kPwStoi};

// Every tunable scalar of every loss. The member initializers are the 2CL
// defaults; DefaultWeights() switches alpha/beta for 3CL.
struct LossWeights {
  double alpha = 0.5;
  double beta = 0.0;
  double lambda1 = 0.2;
  double lambda2 = 0.8;
  double theta1 = 0.1;
  double theta2 = 0.0309;
  double gamma1 = 0.92;
  double gamma2 = 0.6;
  std::size_t lpc_order = 16;
};

inline LossWeights DefaultWeights(LossKind kind) {
  LossWeights w;
  if (kind == LossKind::k3cl) {
    w.alpha = 0.1;
    w.beta = 0.8;
  }
  return w;
}

inline void Validate(const LossWeights& w, LossKind kind) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  switch (kind) {
    case LossKind::k2cl:
      Require(unit(w.alpha), ErrorCode::kInvalidArgument, "2cl: alpha must lie in [0,1]");
      break;
    case LossKind::k3cl:
      Require(unit(w.alpha) && unit(w.beta), ErrorCode::kInvalidArgument,
              "3cl: alpha and beta must lie in [0,1]");
      Require(w.alpha + w.beta <= 1.0, ErrorCode::kInvalidArgument,
              "3cl: alpha + beta must not exceed 1");
      break;
    case LossKind::kPwPesq:
      Require(unit(w.lambda1) && unit(w.lambda2), ErrorCode::kInvalidArgument,
              "pw-pesq: lambda1 and lambda2 must lie in [0,1]");
      Require(w.theta1 > 0.0 && w.theta2 > 0.0, ErrorCode::kInvalidArgument,
              "pw-pesq: theta1 and theta2 must be positive");
      break;
    case LossKind::kPwFilt:
      Require(w.gamma1 > 0.0 && w.gamma1 <= 1.0 && w.gamma2 > 0.0 && w.gamma2 <= 1.0,
              ErrorCode::kInvalidArgument, "pw-filt: gamma1 and gamma2 must lie in (0,1]");
      Require(w.lpc_order > 0, ErrorCode::kInvalidArgument, "pw-filt: lpc order must be > 0");
      break;
    case LossKind::kMse:
    case LossKind::kPwStoi:
      break;
  }
}

// per_frame[l] is J_l. grad is the derivative of sum_l J_l with respect to
// M_l(k); for frame-wise losses its row l is dJ_l/dM_l. total is the mean of
// per_frame over frames first_frame..L-1.
struct LossResult {
  std::vector<double> per_frame;
  double total = 0.0;
  RealMatrix grad;
  std::size_t first_frame = 0;
  std::map<std::string, std::vector<double>> terms;
};

namespace loss_detail {

inline void CheckInputs(const ComponentMagnitudes& c, const RealMatrix& mask) {
  Validate(c);
  RequireSameShape(c.noisy, mask, "loss: mask shape");
  ValidateMask(mask);
}

inline void Finish(LossResult& r) {
  const std::size_t n = r.per_frame.size() - r.first_frame;
  double acc = 0.0;
  for (std::size_t l = r.first_frame; l < r.per_frame.size(); ++l) acc += r.per_frame[l];
  r.total = n ? acc / static_cast<double>(n) : 0.0;
}

// (1 - a) sum (M|S| - |S|)^2 and a sum (M|D|)^2 with their gradients
// accumulated into grad. Shared by 2CL and 3CL so both produce identical
// arithmetic for the common terms.
inline void AddComponentTerms(const ComponentMagnitudes& c, const RealMatrix& mask,
                              double speech_weight, double noise_weight, LossResult& r) {
  auto& speech_term = r.terms["speech"];
  auto& noise_term = r.terms["noise"];
  speech_term.assign(c.frames(), 0.0);
  noise_term.assign(c.frames(), 0.0);
  for (std::size_t l = 0; l < c.frames(); ++l) {
    double js = 0.0, jd = 0.0;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double m = mask(l, k), s = c.speech(l, k), d = c.noise(l, k);
      const double es = m * s - s;
      const double dt = m * d;
      js += es * es;
      jd += dt * dt;
      r.grad(l, k) += 2.0 * speech_weight * es * s + 2.0 * noise_weight * dt * d;
    }
    speech_term[l] = js;
    noise_term[l] = jd;
    r.per_frame[l] = speech_weight * js + noise_weight * jd;
  }
}

}  // namespace loss_detail

inline LossResult NewResult(std::size_t frames, std::size_t bins) {
  LossResult r;
  r.per_frame.assign(frames, 0.0);
  r.grad = RealMatrix(frames, bins, 0.0);
  return r;
}

// J_l = sum_k (M|Y| - |S|)^2
inline LossResult MseLoss(const ComponentMagnitudes& c, const RealMatrix& mask) {
  loss_detail::CheckInputs(c, mask);
  auto r = NewResult(c.frames(), c.bins());
  for (std::size_t l = 0; l < c.frames(); ++l) {
    double j = 0.0;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double e = mask(l, k) * c.noisy(l, k) - c.speech(l, k);
      j += e * e;
      r.grad(l, k) = 2.0 * e * c.noisy(l, k);
    }
    r.per_frame[l] = j;
  }
  loss_detail::Finish(r);
  return r;
}

// J_l = (1-a) sum (|S~| - |S|)^2 + a sum |D~|^2
inline LossResult Cl2Loss(const ComponentMagnitudes& c, const RealMatrix& mask, double alpha) {
  loss_detail::CheckInputs(c, mask);
  Require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
          "2cl: alpha must lie in [0,1]");
  auto r = NewResult(c.frames(), c.bins());
  loss_detail::AddComponentTerms(c, mask, 1.0 - alpha, alpha, r);
  loss_detail::Finish(r);
  return r;
}

inline constexpr double kNormEpsilon = 1e-12;

// 2CL with the speech weight reduced to 1-a-b plus b times the squared
// distance between the frame-normalized |D~| and |D|. Frames where either
// noise spectrum is identically zero get no third-term contribution.
inline LossResult Cl3Loss(const ComponentMagnitudes& c, const RealMatrix& mask, double alpha,
                          double beta) {
  loss_detail::CheckInputs(c, mask);
  Require(alpha >= 0.0 && beta >= 0.0 && alpha + beta <= 1.0, ErrorCode::kInvalidArgument,
          "3cl: need alpha, beta >= 0 and alpha + beta <= 1");
  auto r = NewResult(c.frames(), c.bins());
  loss_detail::AddComponentTerms(c, mask, 1.0 - alpha - beta, alpha, r);
  auto& shape_term = r.terms["noise_shape"];
  shape_term.assign(c.frames(), 0.0);
  if (beta == 0.0) {
    loss_detail::Finish(r);
    return r;
  }
  std::vector<double> u(c.bins()), diff(c.bins());
  for (std::size_t l = 0; l < c.frames(); ++l) {
    double e_filt = 0.0, e_ref = 0.0;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double a = mask(l, k) * c.noise(l, k);
      e_filt += a * a;
      e_ref += c.noise(l, k) * c.noise(l, k);
    }
    if (e_filt == 0.0 || e_ref == 0.0) continue;
    const double n_filt = std::sqrt(e_filt + kNormEpsilon);
    const double n_ref = std::sqrt(e_ref + kNormEpsilon);
    double t = 0.0, proj = 0.0;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double a = mask(l, k) * c.noise(l, k);
      u[k] = a / n_filt;
      diff[k] = u[k] - c.noise(l, k) / n_ref;
      t += diff[k] * diff[k];
      proj += diff[k] * a;
    }
    shape_term[l] = t;
    r.per_frame[l] += beta * t;
    const double n3 = n_filt * n_filt * n_filt;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double a = mask(l, k) * c.noise(l, k);
      const double dt_da = 2.0 * diff[k] / n_filt - 2.0 * a * proj / n3;
      r.grad(l, k) += beta * dt_da * c.noise(l, k);
    }
  }
  loss_detail::Finish(r);
  return r;
}

// J_l = sum_k |W_l(k)|^2 (M|Y| - |S|)^2 with the weighting held constant.
inline LossResult PwFiltLoss(const ComponentMagnitudes& c, const RealMatrix& mask,
                             const RealMatrix& weighting) {
  loss_detail::CheckInputs(c, mask);
  Require(!weighting.empty(), ErrorCode::kPrecondition, "pw-filt: missing weighting");
  RequireSameShape(c.noisy, weighting, "pw-filt: weighting shape");
  auto r = NewResult(c.frames(), c.bins());
  for (std::size_t l = 0; l < c.frames(); ++l) {
    double j = 0.0;
    for (std::size_t k = 0; k < c.bins(); ++k) {
      const double w = weighting(l, k);
      const double e = mask(l, k) * c.noisy(l, k) - c.speech(l, k);
      j += w * e * e;
      r.grad(l, k) = 2.0 * w * e * c.noisy(l, k);
    }
    r.per_frame[l] = j;
  }
  loss_detail::Finish(r);
  return r;
}

struct PesqDistortion {
  double symmetric = 0.0;
  double asymmetric = 0.0;
  // d(theta1 Ls + theta2 La)/d loud_hat(b)
  std::vector<double> slope;
};

// Symmetric and asymmetric loudness-domain distortion of one frame.
inline PesqDistortion PesqFrameDistortion(std::span<const double> loud_hat,
                                          std::span<const double> loud_ref, double theta1,
                                          double theta2, const LoudnessConfig& cfg) {
  PesqDistortion out;
  out.slope.assign(loud_hat.size(), 0.0);
  for (std::size_t b = 0; b < loud_hat.size(); ++b) {
    const double lh = loud_hat[b], lr = loud_ref[b];
    const double d = lh - lr;
    const double e = std::abs(d) - cfg.masking_fraction * std::min(lh, lr);
    if (e <= 0.0) continue;
    const double de = (d > 0.0 ? 1.0 : -1.0) - (lh < lr ? cfg.masking_fraction : 0.0);
    const double ratio = (lh + cfg.asymmetry_offset) / (lr + cfg.asymmetry_offset);
    const double raw = std::pow(ratio, cfg.asymmetry_exponent);
    double factor = raw;
    double dfactor = cfg.asymmetry_exponent * std::pow(ratio, cfg.asymmetry_exponent - 1.0) /
                     (lr + cfg.asymmetry_offset);
    if (raw < cfg.asymmetry_floor) {
      factor = 0.0;
      dfactor = 0.0;
    } else if (raw > cfg.asymmetry_cap) {
      factor = cfg.asymmetry_cap;
      dfactor = 0.0;
    }
    out.symmetric += e * e;
    out.asymmetric += factor * e * e;
    out.slope[b] = theta1 * 2.0 * e * de + theta2 * (dfactor * e * e + factor * 2.0 * e * de);
  }
  return out;
}

// J_l = lambda1 J_l^MSE + lambda2 (theta1 L_s + theta2 L_a) on loudness
// spectra of |S_hat| = M|Y| and |S|.
inline LossResult PwPesqLoss(const ComponentMagnitudes& c, const RealMatrix& mask,
                             const LossWeights& w, const LoudnessMap& map) {
  Validate(w, LossKind::kPwPesq);
  auto r = MseLoss(c, mask);
  Require(map.half_bins == c.bins(), ErrorCode::kShapeMismatch,
          "pw-pesq: loudness map width does not match spectrum");
  auto& sym = r.terms["symmetric"];
  auto& asym = r.terms["asymmetric"];
  auto& mse = r.terms["mse"];
  sym.assign(c.frames(), 0.0);
  asym.assign(c.frames(), 0.0);
  mse = r.per_frame;
  std::vector<double> hat(c.bins());
  for (std::size_t l = 0; l < c.frames(); ++l) {
    for (std::size_t k = 0; k < c.bins(); ++k) {
      hat[k] = mask(l, k) * c.noisy(l, k);
      r.grad(l, k) *= w.lambda1;
    }
    const auto power_hat = BandPowers(hat, map);
    const auto loud_ref = LoudnessTransform(c.speech.row(l), map);
    std::vector<double> loud_hat(map.bands());
    for (std::size_t b = 0; b < map.bands(); ++b)
      loud_hat[b] = PowerToLoudness(power_hat[b], map.threshold[b], map.config);
    const auto dist = PesqFrameDistortion(loud_hat, loud_ref, w.theta1, w.theta2, map.config);
    sym[l] = dist.symmetric;
    asym[l] = dist.asymmetric;
    r.per_frame[l] = w.lambda1 * mse[l] +
                     w.lambda2 * (w.theta1 * dist.symmetric + w.theta2 * dist.asymmetric);
    for (std::size_t b = 0; b < map.bands(); ++b) {
      const double g = w.lambda2 * dist.slope[b] *
                       PowerToLoudnessSlope(power_hat[b], map.threshold[b], map.config);
      if (g == 0.0) continue;
      for (std::size_t k = map.lo[b]; k < map.hi[b]; ++k)
        r.grad(l, k) += g * 2.0 * mask(l, k) * c.noisy(l, k) * c.noisy(l, k);
    }
  }
  loss_detail::Finish(r);
  return r;
}

inline constexpr std::size_t kStoiContextFrames = 30;
// Centred energy below this fraction of the raw energy is rounding noise.
inline constexpr double kFlatEnvelope = 1e-20;

// Mean-centred correlation of one-third-octave envelopes over the last N
// frames; J_l = -(1/B) sum_b corr. Defined for l >= N-1 only. Bands with a
// zero-variance envelope (up to rounding) contribute 0.
inline LossResult PwStoiLoss(const ComponentMagnitudes& c, const RealMatrix& mask,
                             const OctaveBandMap& bands,
                             std::size_t context = kStoiContextFrames) {
  loss_detail::CheckInputs(c, mask);
  Require(context >= 2 && c.frames() >= context, ErrorCode::kPrecondition,
          "pw-stoi: need at least " + std::to_string(context) + " frames, got " +
              std::to_string(c.frames()));
  Require(bands.half_bins == c.bins() && bands.bands() > 0, ErrorCode::kShapeMismatch,
          "pw-stoi: band map does not match spectrum");
  const std::size_t nb = bands.bands();
  const std::size_t frames = c.frames();
  RealMatrix ref(frames, nb), est(frames, nb);
  std::vector<double> hat(c.bins());
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t k = 0; k < c.bins(); ++k) hat[k] = mask(l, k) * c.noisy(l, k);
    const auto r_oct = OctaveCompress(c.speech.row(l), bands);
    const auto e_oct = OctaveCompress(hat, bands);
    std::copy(r_oct.begin(), r_oct.end(), ref.row(l).begin());
    std::copy(e_oct.begin(), e_oct.end(), est.row(l).begin());
  }

  auto r = NewResult(frames, c.bins());
  r.first_frame = context - 1;
  RealMatrix d_est(frames, nb, 0.0);  // d(sum_l J_l)/d est(j, b)
  std::vector<double> xc(context), yc(context);
  const double inv_b = 1.0 / static_cast<double>(nb);
  for (std::size_t l = context - 1; l < frames; ++l) {
    const std::size_t first = l + 1 - context;
    double j = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < context; ++i) {
        mx += ref(first + i, b);
        my += est(first + i, b);
      }
      mx /= static_cast<double>(context);
      my /= static_cast<double>(context);
      double sxx = 0.0, syy = 0.0, sxy = 0.0, qx = 0.0, qy = 0.0;
      for (std::size_t i = 0; i < context; ++i) {
        xc[i] = ref(first + i, b) - mx;
        yc[i] = est(first + i, b) - my;
        sxx += xc[i] * xc[i];
        syy += yc[i] * yc[i];
        sxy += xc[i] * yc[i];
        qx += ref(first + i, b) * ref(first + i, b);
        qy += est(first + i, b) * est(first + i, b);
      }
      if (sxx <= kFlatEnvelope * qx || syy <= kFlatEnvelope * qy) continue;
      const double nx = std::sqrt(sxx), ny = std::sqrt(syy);
      const double corr = sxy / (nx * ny);
      j -= inv_b * corr;
      for (std::size_t i = 0; i < context; ++i)
        d_est(first + i, b) -= inv_b * (xc[i] / nx - corr * yc[i] / ny) / ny;
    }
    r.per_frame[l] = j;
  }
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t b = 0; b < nb; ++b) {
      const double g = d_est(l, b);
      if (g == 0.0 || est(l, b) == 0.0) continue;
      for (std::size_t k = bands.lo[b]; k < bands.hi[b]; ++k)
        r.grad(l, k) += g * mask(l, k) * c.noisy(l, k) * c.noisy(l, k) / est(l, b);
    }
  }
  loss_detail::Finish(r);
  return r;
}

// Bin-wise minimizer of the 2CL loss:
// M* = (1-a)|S|^2 / ((1-a)|S|^2 + a|D|^2), 0 where both components vanish.
inline RealMatrix ClosedForm2clMask(const RealMatrix& speech, const RealMatrix& noise,
                                    double alpha) {
  RequireSameShape(speech, noise, "closed-form mask");
  Require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
          "closed-form mask: alpha must lie in [0,1]");
  RealMatrix out(speech.rows(), speech.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s2 = speech.data()[i] * speech.data()[i];
    const double d2 = noise.data()[i] * noise.data()[i];
    const double num = (1.0 - alpha) * s2;
    const double den = num + alpha * d2;
    out.data()[i] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

// Everything a loss needs beyond the magnitudes themselves.
struct LossContext {
  RealMatrix weighting;  // |W_l(k)|^2, pw-filt only
  std::optional<LoudnessMap> loudness;
  std::optional<OctaveBandMap> octave;
  std::size_t stoi_context = kStoiContextFrames;
};

// Builds the context for `kind`. With clean speech samples the PW-FILT
// weighting is computed from time-domain frames, otherwise from |S|.
inline LossContext MakeLossContext(LossKind kind, const ComponentMagnitudes& c,
                                   const LossWeights& w, std::size_t dft_size,
                                   const StftConfig* cfg = nullptr,
                                   std::span<const double> speech = {},
                                   const LoudnessConfig& loud_cfg = {}) {
  LossContext ctx;
  const WeightingFilterSpec spec{w.lpc_order, w.gamma1, w.gamma2};
  switch (kind) {
    case LossKind::kPwFilt:
      ctx.weighting = (cfg && !speech.empty())
                          ? WeightingFromSpeech(speech, *cfg, spec)
                          : WeightingFromSpeechMagnitudes(c.speech, dft_size, spec);
      break;
    case LossKind::kPwPesq:
      ctx.loudness = MakeLoudnessMap(dft_size, loud_cfg);
      break;
    case LossKind::kPwStoi:
      ctx.octave = MakeOctaveBands(dft_size);
      break;
    default:
      break;
  }
  return ctx;
}

inline LossResult EvaluateLoss(LossKind kind, const ComponentMagnitudes& c,
                               const RealMatrix& mask, const LossWeights& w,
                               const LossContext& ctx) {
  Validate(w, kind);
  switch (kind) {
    case LossKind::kMse: return MseLoss(c, mask);
    case LossKind::k2cl: return Cl2Loss(c, mask, w.alpha);
    case LossKind::k3cl: return Cl3Loss(c, mask, w.alpha, w.beta);
    case LossKind::kPwFilt: return PwFiltLoss(c, mask, ctx.weighting);
    case LossKind::kPwPesq:
      Require(ctx.loudness.has_value(), ErrorCode::kPrecondition,
              "pw-pesq: loudness map not configured");
      return PwPesqLoss(c, mask, w, *ctx.loudness);
    case LossKind::kPwStoi:
      Require(ctx.octave.has_value(), ErrorCode::kPrecondition,
              "pw-stoi: band map not configured");
      return PwStoiLoss(c, mask, *ctx.octave, ctx.stoi_context);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown loss");
}

// Bundle forms: the mask and references are taken from the white-box bundle.
inline LossResult MseLoss(const WhiteBoxBundle& b) { return MseLoss(MagnitudesOf(b), b.mask); }
inline LossResult Cl2Loss(const WhiteBoxBundle& b, double alpha) {
  return Cl2Loss(MagnitudesOf(b), b.mask, alpha);
}
inline LossResult Cl3Loss(const WhiteBoxBundle& b, double alpha, double beta) {
  return Cl3Loss(MagnitudesOf(b), b.mask, alpha, beta);
}

}  // namespace closs
