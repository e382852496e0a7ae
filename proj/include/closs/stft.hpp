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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "closs/error.hpp"
#include "closs/fft.hpp"
#include "closs/matrix.hpp"
#include "closs/signal.hpp"

namespace closs {

// Framing parameters. The analysis window is the periodic Hann of length
// dft_size; synthesis is plain overlap-add (rectangular synthesis window),
// for which Hann at 50 % overlap sums to one.
struct StftConfig {
  std::size_t dft_size = 256;
  std::size_t hop = 128;
  std::size_t k_in = 132;
  // Prepend one hop of zeros so that every signal sample lies under two
  // frames and reconstruction is exact up to the signal edges.
  bool pad_edges = true;

  std::size_t half_bins() const noexcept { return dft_size / 2 + 1; }
  std::size_t head_padding() const noexcept { return pad_edges ? hop : 0; }
};

inline void Validate(const StftConfig& cfg) {
  Require(cfg.dft_size >= 4 && cfg.dft_size % 2 == 0, ErrorCode::kInvalidArgument,
          "dft_size must be even and >= 4");
  Require(cfg.hop * 2 == cfg.dft_size, ErrorCode::kInvalidArgument,
          "hop must equal dft_size / 2");
}

inline void ValidateBinExtension(const StftConfig& cfg) {
  Validate(cfg);
  Require(cfg.k_in >= cfg.half_bins() && cfg.k_in <= cfg.dft_size && cfg.k_in % 4 == 0,
          ErrorCode::kInvalidArgument,
          "k_in must lie in [K/2+1, K] and be divisible by 4, got " +
              std::to_string(cfg.k_in));
}

inline std::vector<double> PeriodicHann(std::size_t k) {
  std::vector<double> w(k);
  for (std::size_t n = 0; n < k; ++n)
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                 static_cast<double>(k)));
  return w;
}

// Sum over overlapping frames of analysis x synthesis window, one hop long.
// Constant for a valid configuration.
inline std::vector<double> OverlapSum(const StftConfig& cfg) {
  Validate(cfg);
  const auto w = PeriodicHann(cfg.dft_size);
  std::vector<double> sum(cfg.hop, 0.0);
  for (std::size_t n = 0; n < cfg.hop; ++n)
    for (std::size_t m = n; m < cfg.dft_size; m += cfg.hop) sum[n] += w[m];
  return sum;
}

struct SpectralFrames {
  ComplexMatrix data;  // frames x dft_size
  StftConfig config;
  std::size_t origin_length = 0;

  std::size_t frames() const noexcept { return data.rows(); }
  std::size_t bins() const noexcept { return data.cols(); }
};

inline std::size_t FrameCount(std::size_t length, const StftConfig& cfg) {
  if (cfg.pad_edges) return (length - 1) / cfg.hop + 2;
  if (length <= cfg.dft_size) return 1;
  return (length - cfg.dft_size + cfg.hop - 1) / cfg.hop + 1;
}

inline std::size_t PaddedLength(std::size_t frames, const StftConfig& cfg) {
  return (frames - 1) * cfg.hop + cfg.dft_size;
}

// Frame l covers padded samples [l*hop, l*hop + K); padded sample p is
// signal sample p - head_padding().
inline SpectralFrames Analyze(std::span<const double> x, const StftConfig& cfg) {
  Validate(cfg);
  Require(!x.empty(), ErrorCode::kPrecondition, "analyze: empty signal");
  const std::size_t k = cfg.dft_size;
  const std::size_t frames = FrameCount(x.size(), cfg);
  const std::size_t head = cfg.head_padding();
  const auto window = PeriodicHann(k);
  const Fft fft(k);

  SpectralFrames out;
  out.config = cfg;
  out.origin_length = x.size();
  out.data = ComplexMatrix(frames, k);
  std::vector<Complex> buf(k);
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t n = 0; n < k; ++n) {
      const std::size_t p = l * cfg.hop + n;
      const double v = (p >= head && p - head < x.size()) ? x[p - head] : 0.0;
      buf[n] = Complex(window[n] * v, 0.0);
    }
    fft.Forward(buf);
    auto row = out.data.row(l);
    row[0] = Complex(buf[0].real(), 0.0);
    row[k / 2] = Complex(buf[k / 2].real(), 0.0);
    for (std::size_t b = 1; b < k / 2; ++b) {
      row[b] = buf[b];
      row[k - b] = std::conj(buf[b]);
    }
  }
  return out;
}

inline SpectralFrames Analyze(const SignalBuffer& x, const StftConfig& cfg) {
  return Analyze(x.view(), cfg);
}

// Inverse DFT per frame (upper half rebuilt from bins 0..K/2), overlap-add,
// division by the constant overlap sum, trim to origin_length.
inline SignalBuffer Synthesize(const SpectralFrames& frames) {
  const auto& cfg = frames.config;
  Validate(cfg);
  Require(frames.bins() == cfg.dft_size, ErrorCode::kShapeMismatch,
          "synthesize: bin count does not match dft_size");
  Require(frames.frames() == FrameCount(frames.origin_length, cfg),
          ErrorCode::kShapeMismatch, "synthesize: frame count inconsistent with length");
  const std::size_t k = cfg.dft_size;
  const Fft fft(k);
  const auto overlap = OverlapSum(cfg);
  double norm = 0.0;
  for (double v : overlap) norm += v;
  norm /= static_cast<double>(overlap.size());

  std::vector<double> acc(PaddedLength(frames.frames(), cfg), 0.0);
  std::vector<Complex> buf(k);
  for (std::size_t l = 0; l < frames.frames(); ++l) {
    const auto row = frames.data.row(l);
    buf[0] = Complex(row[0].real(), 0.0);
    buf[k / 2] = Complex(row[k / 2].real(), 0.0);
    for (std::size_t b = 1; b < k / 2; ++b) {
      buf[b] = row[b];
      buf[k - b] = std::conj(row[b]);
    }
    fft.Inverse(buf);
    for (std::size_t n = 0; n < k; ++n) acc[l * cfg.hop + n] += buf[n].real();
  }
  SignalBuffer out;
  out.samples.resize(frames.origin_length);
  const std::size_t head = cfg.head_padding();
  for (std::size_t n = 0; n < frames.origin_length; ++n) out.samples[n] = acc[head + n] / norm;
  return out;
}

inline RealMatrix Magnitudes(const SpectralFrames& frames) {
  const std::size_t half = frames.config.half_bins();
  RealMatrix out(frames.frames(), half);
  for (std::size_t l = 0; l < frames.frames(); ++l)
    for (std::size_t b = 0; b < half; ++b) out(l, b) = std::abs(frames.data(l, b));
  return out;
}

// Magnitudes of bins 0..k_in-1; the bins past K/2 are the redundant mirror
// bins, |X(K/2+j)| == |X(K/2-j)|.
inline RealMatrix ExtendBins(const SpectralFrames& frames) {
  const auto& cfg = frames.config;
  ValidateBinExtension(cfg);
  RealMatrix out(frames.frames(), cfg.k_in);
  for (std::size_t l = 0; l < frames.frames(); ++l)
    for (std::size_t b = 0; b < cfg.k_in; ++b) out(l, b) = std::abs(frames.data(l, b));
  return out;
}

inline RealMatrix TruncateBins(const RealMatrix& wide, std::size_t half_bins) {
  Require(wide.cols() >= half_bins, ErrorCode::kShapeMismatch,
          "truncate_bins: matrix narrower than K/2+1");
  RealMatrix out(wide.rows(), half_bins);
  for (std::size_t l = 0; l < wide.rows(); ++l)
    for (std::size_t b = 0; b < half_bins; ++b) out(l, b) = wide(l, b);
  return out;
}

inline void WriteSpectrogramCsv(const SpectralFrames& frames, std::ostream& os) {
  os << "frame,bin,re,im\n";
  os.precision(17);
  for (std::size_t l = 0; l < frames.frames(); ++l)
    for (std::size_t b = 0; b < frames.bins(); ++b)
      os << l << ',' << b << ',' << frames.data(l, b).real() << ','
         << frames.data(l, b).imag() << '\n';
}

}  // namespace closs
