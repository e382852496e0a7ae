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
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "closs/error.hpp"

namespace closs {

// Complex DFT of arbitrary length: iterative radix-2 when the length is a
// power of two, direct summation otherwise. Forward uses e^{-j2πnk/K}; the
// inverse carries the 1/K factor.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), twiddle_(n) {
    Require(n > 0, ErrorCode::kInvalidArgument, "fft size must be positive");
    for (std::size_t k = 0; k < n; ++k) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
      twiddle_[k] = std::polar(1.0, phase);
    }
    pow2_ = (n & (n - 1)) == 0;
    if (pow2_) {
      bitrev_.resize(n);
      std::size_t bits = 0;
      while ((std::size_t{1} << bits) < n) ++bits;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
          if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        bitrev_[i] = r;
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  void Forward(std::span<std::complex<double>> x) const { Transform(x, false); }

  void Inverse(std::span<std::complex<double>> x) const {
    Transform(x, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : x) v *= scale;
  }

 private:
  std::complex<double> Twiddle(std::size_t idx, bool inverse) const {
    const auto& w = twiddle_[idx % n_];
    return inverse ? std::conj(w) : w;
  }

  void Transform(std::span<std::complex<double>> x, bool inverse) const {
    Require(x.size() == n_, ErrorCode::kShapeMismatch, "fft: length mismatch");
    if (!pow2_) {
      std::vector<std::complex<double>> out(n_);
      for (std::size_t k = 0; k < n_; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < n_; ++n) acc += x[n] * Twiddle(n * k, inverse);
        out[k] = acc;
      }
      std::copy(out.begin(), out.end(), x.begin());
      return;
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const auto w = Twiddle(j * stride, inverse);
          const auto u = x[start + j];
          const auto v = x[start + j + half] * w;
          x[start + j] = u + v;
          x[start + j + half] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  bool pow2_ = false;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::size_t> bitrev_;
};

}  // namespace closs
