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
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "closs/error.hpp"
#include "closs/signal.hpp"
#include "closs/speech_level.hpp"

namespace closs {

namespace wav_detail {

inline std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace wav_detail

// Reads a RIFF/WAVE file holding 16-bit PCM mono at 16 kHz. Samples are
// scaled by 1/32768.
inline SignalBuffer ReadWav(const std::filesystem::path& path) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  Require(bytes.size() >= 12 && std::string(bytes.begin(), bytes.begin() + 4) == "RIFF" &&
              std::string(bytes.begin() + 8, bytes.begin() + 12) == "WAVE",
          ErrorCode::kUnsupportedFormat, name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    const std::uint32_t len = ReadU32(&bytes[pos + 4]);
    const std::size_t body = pos + 8;
    Require(body + len <= bytes.size() || id == "data", ErrorCode::kUnsupportedFormat,
            name + ": truncated chunk '" + id + "'");
    if (id == "fmt ") {
      Require(len >= 16, ErrorCode::kUnsupportedFormat, name + ": short fmt chunk");
      format = ReadU16(&bytes[body]);
      channels = ReadU16(&bytes[body + 2]);
      rate = ReadU32(&bytes[body + 4]);
      bits = ReadU16(&bytes[body + 14]);
      have_fmt = true;
    } else if (id == "data") {
      Require(have_fmt, ErrorCode::kUnsupportedFormat, name + ": data before fmt");
      Require(format == 1 && bits == 16, ErrorCode::kUnsupportedFormat,
              name + ": only 16-bit integer PCM is supported");
      Require(channels == 1, ErrorCode::kWrongChannelCount,
              name + ": expected mono, got " + std::to_string(channels) + " channels");
      Require(rate == static_cast<std::uint32_t>(kSampleRate), ErrorCode::kWrongSampleRate,
              name + ": expected 16000 Hz, got " + std::to_string(rate));
      const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
      SignalBuffer out;
      out.samples.resize(avail / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(ReadU16(&bytes[body + 2 * i]));
        out.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return out;
    }
    pos = body + len + (len & 1u);
  }
  throw Error(ErrorCode::kUnsupportedFormat, name + ": no data chunk");
}

struct WavWriteInfo {
  std::size_t clipped = 0;
};

inline std::int16_t QuantizeSample(double v, std::size_t& clipped) {
  if (v > 1.0 || v < -1.0) ++clipped;
  const double scaled = std::round(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

// Writes 16-bit PCM mono 16 kHz. Samples outside [-1, 1] saturate and are
// counted rather than rejected.
inline WavWriteInfo WriteWav(const SignalBuffer& x, const std::filesystem::path& path) {
  using namespace wav_detail;
  WavWriteInfo info;
  const auto data_bytes = static_cast<std::uint32_t>(x.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  for (char c : std::string("RIFF")) out.push_back(static_cast<unsigned char>(c));
  PutU32(out, 36 + data_bytes);
  for (char c : std::string("WAVEfmt ")) out.push_back(static_cast<unsigned char>(c));
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, kSampleRate);
  PutU32(out, kSampleRate * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  for (char c : std::string("data")) out.push_back(static_cast<unsigned char>(c));
  PutU32(out, data_bytes);
  for (double v : x.samples) {
    const auto q = static_cast<std::uint16_t>(QuantizeSample(v, info.clipped));
    PutU16(out, q);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  Require(file.good(), ErrorCode::kIo, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  Require(file.good(), ErrorCode::kIo, "write failed: " + path.string());
  return info;
}

struct MixSpec {
  std::string clean_path;
  std::string noise_path;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

struct Mixture {
  SignalBuffer noisy;   // y = s + g d
  SignalBuffer speech;  // s, unscaled
  SignalBuffer noise;   // g d, the scaled noise segment
  double gain = 1.0;
  std::size_t noise_offset = 0;
  double speech_level_db = 0.0;
  double measured_snr_db = 0.0;
};

inline std::size_t NoiseOffset(std::size_t noise_len, std::size_t speech_len,
                               std::uint64_t seed) {
  if (noise_len == speech_len) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, noise_len - speech_len);
  return pick(rng);
}

// Scales a seed-selected noise segment so that the P.56 active level of the
// speech over the mean power of the scaled noise equals snr_db.
inline Mixture MixAtSnr(const SignalBuffer& speech, const SignalBuffer& noise,
                        double snr_db, std::uint64_t seed,
                        const SpeechLevelOptions& level_opt = {}) {
  Validate(speech, "speech");
  Validate(noise, "noise");
  Require(std::isfinite(snr_db), ErrorCode::kInvalidArgument, "snr_db must be finite");
  Require(!speech.empty(), ErrorCode::kSilentSignal, "speech is empty");
  Require(noise.size() >= speech.size(), ErrorCode::kInvalidArgument,
          "noise shorter than speech");

  Mixture mix;
  mix.noise_offset = NoiseOffset(noise.size(), speech.size(), seed);
  std::span<const double> segment(noise.samples.data() + mix.noise_offset, speech.size());
  const double noise_power = MeanPower(segment);
  Require(noise_power > 0.0, ErrorCode::kSilentSignal, "noise segment is silent");

  mix.speech_level_db = ActiveSpeechLevelDb(speech, level_opt);
  mix.gain = std::sqrt(std::pow(10.0, (mix.speech_level_db - snr_db) / 10.0) / noise_power);

  mix.speech = speech;
  mix.noise.samples.resize(speech.size());
  mix.noisy.samples.resize(speech.size());
  for (std::size_t n = 0; n < speech.size(); ++n) {
    mix.noise.samples[n] = mix.gain * segment[n];
    mix.noisy.samples[n] = speech.samples[n] + mix.noise.samples[n];
  }
  mix.measured_snr_db = mix.speech_level_db - PowerDb(MeanPower(mix.noise.view()));
  return mix;
}

}  // namespace closs
