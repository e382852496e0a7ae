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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "closs/error.hpp"
#include "closs/losses.hpp"
#include "closs/metrics.hpp"
#include "closs/mlp.hpp"
#include "closs/perceptual.hpp"
#include "closs/signal_io.hpp"
#include "closs/trainer.hpp"

namespace closs {

using Json = nlohmann::json;

inline Json ToJson(const LossWeights& w) {
  return Json{{"alpha", w.alpha},     {"beta", w.beta},     {"lambda1", w.lambda1},
              {"lambda2", w.lambda2}, {"theta1", w.theta1}, {"theta2", w.theta2},
              {"gamma1", w.gamma1},   {"gamma2", w.gamma2}, {"lpc_order", w.lpc_order}};
}

// Overrides only the keys present in `j`.
inline LossWeights WeightsFromJson(const Json& j, LossWeights w = {}) {
  Require(j.is_object(), ErrorCode::kInvalidArgument, "weights must be a JSON object");
  auto take = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  take("alpha", w.alpha);
  take("beta", w.beta);
  take("lambda1", w.lambda1);
  take("lambda2", w.lambda2);
  take("theta1", w.theta1);
  take("theta2", w.theta2);
  take("gamma1", w.gamma1);
  take("gamma2", w.gamma2);
  if (j.contains("lpc_order")) w.lpc_order = j.at("lpc_order").get<std::size_t>();
  return w;
}

inline Json LossReportJson(LossKind kind, const LossWeights& w, const LossResult& r) {
  Json j{{"loss_name", ToString(kind)},
         {"weights", ToJson(w)},
         {"per_frame", r.per_frame},
         {"first_frame", r.first_frame},
         {"total", r.total}};
  if (!r.terms.empty()) {
    Json terms = Json::object();
    for (const auto& [name, values] : r.terms) terms[name] = values;
    j["terms"] = terms;
  }
  return j;
}

inline Json ToJson(const MetricReport& r) {
  Json j{{"noise_component",
          {{"delta_snr_db", r.delta_snr_db},
           {"na_seg_db", r.na_seg_db},
           {"wlakr", r.wlakr},
           {"wlakr_abs", r.wlakr_abs}}},
         {"speech_component", {{"ssdr_db", r.ssdr_db}, {"stoi_proxy_s_tilde", r.stoi_proxy_component}}},
         {"total", {{"stoi_proxy", r.stoi_proxy}}},
         {"alignment_lag", r.alignment_lag},
         {"speech_active_frames", r.speech_active_frames.size()}};
  j["total"]["pesq_s_hat"] = r.pesq_s_hat ? Json(*r.pesq_s_hat) : Json(nullptr);
  j["total"]["polqa_s_hat"] = r.polqa_s_hat ? Json(*r.polqa_s_hat) : Json(nullptr);
  j["speech_component"]["pesq_s_tilde"] = r.pesq_s_tilde ? Json(*r.pesq_s_tilde) : Json(nullptr);
  return j;
}

// One row of the batch evaluation table.
struct MetricRow {
  std::string utterance;
  double snr_in = 0.0;
  std::string loss_name;
  double alpha = 0.0;
  double beta = 0.0;
  MetricReport report;
};

inline void WriteMetricCsvHeader(std::ostream& os) {
  os << "utterance,snr_in,loss_name,alpha,beta,delta_snr,ssdr,na_seg,wlakr_abs,stoi_proxy\n";
}

inline void WriteMetricCsvRow(const MetricRow& row, std::ostream& os) {
  const auto old = os.precision(10);
  os << row.utterance << ',' << row.snr_in << ',' << row.loss_name << ',' << row.alpha << ','
     << row.beta << ',' << row.report.delta_snr_db << ',' << row.report.ssdr_db << ','
     << row.report.na_seg_db << ',' << row.report.wlakr_abs << ',' << row.report.stoi_proxy
     << '\n';
  os.precision(old);
}

inline Json ToJson(const OctaveBandMap& m) {
  Json bands = Json::array();
  for (std::size_t b = 0; b < m.bands(); ++b)
    bands.push_back({{"lo", m.lo[b]}, {"hi", m.hi[b]}, {"center_hz", m.center_hz[b]}});
  return Json{{"kind", "one-third-octave"}, {"half_bins", m.half_bins}, {"bands", bands}};
}

inline Json ToJson(const LoudnessMap& m) {
  Json bands = Json::array();
  for (std::size_t b = 0; b < m.bands(); ++b)
    bands.push_back({{"lo", m.lo[b]},
                     {"hi", m.hi[b]},
                     {"center_hz", m.center_hz[b]},
                     {"threshold", m.threshold[b]}});
  return Json{{"kind", "loudness"},
              {"version", m.config.version},
              {"exponent", m.config.exponent},
              {"scale", m.config.scale},
              {"half_bins", m.half_bins},
              {"bands", bands}};
}

// ---------------------------------------------------------------------------
// Manifest

inline Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

// Manifest rows are {clean, noise, snr_db, seed}; relative paths resolve
// against `base`.
inline std::vector<MixSpec> ParseManifest(const Json& j, const std::filesystem::path& base = {}) {
  Require(j.is_array(), ErrorCode::kInvalidArgument, "manifest must be a JSON array");
  std::vector<MixSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    const std::string where = "manifest row " + std::to_string(i) + ": ";
    Require(row.is_object(), ErrorCode::kInvalidArgument, where + "not an object");
    for (const char* key : {"clean", "noise", "snr_db"})
      Require(row.contains(key), ErrorCode::kInvalidArgument, where + "missing '" + key + "'");
    Require(row["clean"].is_string() && row["noise"].is_string(), ErrorCode::kInvalidArgument,
            where + "clean and noise must be strings");
    Require(row["snr_db"].is_number(), ErrorCode::kInvalidArgument,
            where + "snr_db must be a number");
    MixSpec spec;
    auto resolve = [&](const std::string& p) {
      std::filesystem::path fp(p);
      return ((fp.is_relative() && !base.empty()) ? base / fp : fp).string();
    };
    spec.clean_path = resolve(row["clean"].get<std::string>());
    spec.noise_path = resolve(row["noise"].get<std::string>());
    spec.snr_db = row["snr_db"].get<double>();
    Require(std::isfinite(spec.snr_db), ErrorCode::kInvalidArgument,
            where + "snr_db must be finite");
    if (row.contains("seed")) {
      Require(row["seed"].is_number_integer(), ErrorCode::kInvalidArgument,
              where + "seed must be an integer");
      spec.seed = row["seed"].get<std::uint64_t>();
    }
    out.push_back(std::move(spec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint

inline constexpr const char* kCheckpointFormat = "closs-mlp";
inline constexpr int kCheckpointVersion = 1;

inline Json ToJson(const MlpMaskModel& m) {
  Json layers = Json::array();
  for (const auto& l : m.layers) {
    std::vector<double> w(l.weights.data(), l.weights.data() + l.weights.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()},
                      {"weights", w}, {"bias", b}});
  }
  return Json{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"k_in", m.k_in},
              {"context", m.context},
              {"hidden", m.hidden},
              {"leaky_slope", m.leaky_slope},
              {"layers", layers},
              {"normalization", {{"mean", m.norm.mean}, {"stddev", m.norm.stddev}}}};
}

inline MlpMaskModel ModelFromJson(const Json& j) {
  try {
    Require(j.at("format").get<std::string>() == kCheckpointFormat,
            ErrorCode::kUnsupportedFormat, "checkpoint: unknown format");
    Require(j.at("version").get<int>() == kCheckpointVersion, ErrorCode::kUnsupportedFormat,
            "checkpoint: unsupported version");
    MlpMaskModel m;
    m.k_in = j.at("k_in").get<std::size_t>();
    m.context = j.at("context").get<std::size_t>();
    m.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    m.leaky_slope = j.at("leaky_slope").get<double>();
    std::size_t fan_in = m.input_width();
    const auto& layers = j.at("layers");
    Require(layers.size() == m.hidden.size() + 1, ErrorCode::kShapeMismatch,
            "checkpoint: layer count does not match hidden sizes");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& lj = layers[i];
      const auto rows = lj.at("rows").get<std::size_t>();
      const auto cols = lj.at("cols").get<std::size_t>();
      const std::size_t expect_rows = i < m.hidden.size() ? m.hidden[i] : m.output_width();
      Require(rows == expect_rows && cols == fan_in, ErrorCode::kShapeMismatch,
              "checkpoint: layer " + std::to_string(i) + " has wrong dimensions");
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      Require(w.size() == rows * cols && b.size() == rows, ErrorCode::kShapeMismatch,
              "checkpoint: layer " + std::to_string(i) + " payload size");
      DenseLayer layer;
      layer.weights = Eigen::Map<const MatrixXd>(w.data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols));
      layer.bias = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(rows));
      m.layers.push_back(std::move(layer));
      fan_in = rows;
    }
    m.norm.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.norm.stddev = j.at("normalization").at("stddev").get<std::vector<double>>();
    Require(m.norm.mean.size() == m.k_in && m.norm.stddev.size() == m.k_in,
            ErrorCode::kShapeMismatch, "checkpoint: normalization width");
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, std::string("checkpoint: ") + e.what());
  }
}

inline void SaveCheckpoint(const MlpMaskModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << ToJson(m).dump() << '\n';
  Require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

inline MlpMaskModel LoadCheckpoint(const std::filesystem::path& path) {
  return ModelFromJson(ReadJsonFile(path));
}

}  // namespace closs
