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
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "closs/error.hpp"
#include "closs/matrix.hpp"
#include "closs/signal.hpp"
#include "closs/stft.hpp"

namespace closs {

// |Y|, |S|, |D| over the non-redundant bins, frames x (K/2+1). Every loss
// is evaluated on this representation together with a mask.
struct ComponentMagnitudes {
  RealMatrix noisy;
  RealMatrix speech;
  RealMatrix noise;

  std::size_t frames() const noexcept { return noisy.rows(); }
  std::size_t bins() const noexcept { return noisy.cols(); }
};

inline void Validate(const ComponentMagnitudes& c) {
  RequireSameShape(c.noisy, c.speech, "component magnitudes");
  RequireSameShape(c.noisy, c.noise, "component magnitudes");
}

inline void ValidateMask(const RealMatrix& mask) {
  for (double v : mask.data()) {
    Require(std::isfinite(v), ErrorCode::kNumerical, "mask has a non-finite entry");
    Require(v >= 0.0, ErrorCode::kInvalidArgument, "mask has a negative entry");
  }
}

// Mask applied to one complex spectrum: bins 0..K/2 directly, the upper
// half through the mirrored mask.
inline SpectralFrames ApplyRealMask(const SpectralFrames& x, const RealMatrix& mask) {
  const std::size_t k = x.config.dft_size;
  Require(mask.rows() == x.frames() && mask.cols() == x.config.half_bins(),
          ErrorCode::kShapeMismatch, "mask shape does not match spectrum");
  SpectralFrames out = x;
  for (std::size_t l = 0; l < x.frames(); ++l) {
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t src = b <= k / 2 ? b : k - b;
      out.data(l, b) = x.data(l, b) * mask(l, src);
    }
  }
  return out;
}

// White-box decomposition under one shared mask: S_hat = Y M,
// S_tilde = S M, D_tilde = D M. Keeps the unfiltered references.
struct WhiteBoxBundle {
  RealMatrix mask;
  SpectralFrames noisy;
  SpectralFrames speech;
  SpectralFrames noise;
  SpectralFrames s_hat;
  SpectralFrames s_tilde;
  SpectralFrames d_tilde;

  std::size_t frames() const noexcept { return mask.rows(); }
};

inline bool SameFraming(const SpectralFrames& a, const SpectralFrames& b) {
  return a.config.dft_size == b.config.dft_size && a.config.hop == b.config.hop &&
         a.config.pad_edges == b.config.pad_edges && a.origin_length == b.origin_length &&
         a.data.same_shape(b.data);
}

// additivity_tol bounds |Y - S - D| per bin, relative to max(1, max |Y|).
// Quantized inputs (16-bit WAV) need a looser value than the default.
inline WhiteBoxBundle ApplyMask(const SpectralFrames& y, const SpectralFrames& s,
                                const SpectralFrames& d, const RealMatrix& mask,
                                double additivity_tol = 1e-10) {
  Require(SameFraming(y, s) && SameFraming(y, d), ErrorCode::kShapeMismatch,
          "apply_mask: Y, S, D do not share framing");
  ValidateMask(mask);
  double peak = 1.0;
  for (const auto& v : y.data.data()) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    const Complex r = y.data.data()[i] - s.data.data()[i] - d.data.data()[i];
    Require(std::abs(r) <= additivity_tol * peak, ErrorCode::kPrecondition,
            "apply_mask: Y != S + D (additive model violated)");
  }
  WhiteBoxBundle out;
  out.mask = mask;
  out.noisy = y;
  out.speech = s;
  out.noise = d;
  out.s_hat = ApplyRealMask(y, mask);
  out.s_tilde = ApplyRealMask(s, mask);
  out.d_tilde = ApplyRealMask(d, mask);
  return out;
}

inline ComponentMagnitudes MagnitudesOf(const SpectralFrames& y, const SpectralFrames& s,
                                        const SpectralFrames& d) {
  ComponentMagnitudes c{Magnitudes(y), Magnitudes(s), Magnitudes(d)};
  Validate(c);
  return c;
}

inline ComponentMagnitudes MagnitudesOf(const WhiteBoxBundle& b) {
  return MagnitudesOf(b.noisy, b.speech, b.noise);
}

struct ComponentSignals {
  SignalBuffer s_hat;
  SignalBuffer s_tilde;
  SignalBuffer d_tilde;
};

inline ComponentSignals ComponentsToTime(const WhiteBoxBundle& b) {
  return {Synthesize(b.s_hat), Synthesize(b.s_tilde), Synthesize(b.d_tilde)};
}

// Mask interchange: a "frames,bins" header line, a line with the two
// dimensions, then one comma-separated row per frame.
inline void WriteMaskCsv(const RealMatrix& mask, std::ostream& os) {
  os << "frames,bins\n" << mask.rows() << ',' << mask.cols() << '\n';
  os.precision(17);
  for (std::size_t l = 0; l < mask.rows(); ++l) {
    for (std::size_t b = 0; b < mask.cols(); ++b) {
      if (b) os << ',';
      os << mask(l, b);
    }
    os << '\n';
  }
}

inline RealMatrix ReadMaskCsv(std::istream& is) {
  std::string line;
  Require(static_cast<bool>(std::getline(is, line)), ErrorCode::kUnsupportedFormat,
          "mask csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Require(line == "frames,bins", ErrorCode::kUnsupportedFormat,
          "mask csv: header must be 'frames,bins'");
  std::size_t rows = 0, cols = 0;
  char comma = 0;
  Require(std::getline(is, line) && (std::istringstream(line) >> rows >> comma >> cols) &&
              comma == ',',
          ErrorCode::kUnsupportedFormat, "mask csv: bad dimension line");
  RealMatrix mask(rows, cols);
  for (std::size_t l = 0; l < rows; ++l) {
    Require(static_cast<bool>(std::getline(is, line)), ErrorCode::kUnsupportedFormat,
            "mask csv: expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    std::string cell;
    std::size_t b = 0;
    while (std::getline(row, cell, ',')) {
      Require(b < cols, ErrorCode::kUnsupportedFormat,
              "mask csv: too many values in row " + std::to_string(l));
      try {
        mask(l, b++) = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "mask csv: bad number in row " + std::to_string(l));
      }
    }
    Require(b == cols, ErrorCode::kUnsupportedFormat,
            "mask csv: too few values in row " + std::to_string(l));
  }
  return mask;
}

}  // namespace closs
