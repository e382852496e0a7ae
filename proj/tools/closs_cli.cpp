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

// closs: command-line front end for mixing, loss evaluation, gradient
// checks, mask optimization, training and white-box evaluation.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "closs/closs.hpp"

namespace fs = std::filesystem;
using namespace closs;

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitData = 4,
};

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kExitUsage;
    case ErrorCode::kIo:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kWrongSampleRate:
    case ErrorCode::kWrongChannelCount: return kExitIo;
    default: return kExitData;
  }
}

// ---------------------------------------------------------------------------
// Run configuration: --config JSON first, explicit flags on top.

struct Flags {
  std::string config_path;
  std::string loss = "2cl";
  double alpha = 0, beta = 0, lambda1 = 0, lambda2 = 0, gamma1 = 0, gamma2 = 0;
  std::size_t lpc_order = 16;
  std::size_t dft_size = 256;
  std::size_t hop = 128;
  std::uint64_t seed = 1;
  std::string format = "json";
  bool headroom = false;

  CLI::Option* o_loss = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_lambda1 = nullptr;
  CLI::Option* o_lambda2 = nullptr;
  CLI::Option* o_gamma1 = nullptr;
  CLI::Option* o_gamma2 = nullptr;
  CLI::Option* o_lpc = nullptr;
  CLI::Option* o_dft = nullptr;
  CLI::Option* o_hop = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_format = nullptr;
  CLI::Option* o_headroom = nullptr;
};

struct RunConfig {
  LossKind loss = LossKind::k2cl;
  LossWeights weights;
  StftConfig stft;
  std::string format = "json";
  std::uint64_t seed = 1;
  bool headroom = false;
};

void AddCommonFlags(CLI::App* app, Flags& f, std::size_t default_dft = 256) {
  f.dft_size = default_dft;
  f.hop = default_dft / 2;
  app->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  f.o_loss = app->add_option("--loss", f.loss, "mse|2cl|3cl|pw-filt|pw-pesq|pw-stoi");
  f.o_alpha = app->add_option("--alpha", f.alpha);
  f.o_beta = app->add_option("--beta", f.beta);
  f.o_lambda1 = app->add_option("--lambda1", f.lambda1);
  f.o_lambda2 = app->add_option("--lambda2", f.lambda2);
  f.o_gamma1 = app->add_option("--gamma1", f.gamma1);
  f.o_gamma2 = app->add_option("--gamma2", f.gamma2);
  f.o_lpc = app->add_option("--lpc-order", f.lpc_order);
  f.o_dft = app->add_option("--dft-size", f.dft_size);
  f.o_hop = app->add_option("--hop", f.hop);
  f.o_seed = app->add_option("--seed", f.seed);
  f.o_format = app->add_option("--format", f.format)->check(CLI::IsMember({"json", "csv"}));
  f.o_headroom = app->add_flag("--headroom", f.headroom, "scale written audio by 0.5");
}

RunConfig Resolve(const Flags& f) {
  Json cfg = Json::object();
  if (!f.config_path.empty()) cfg = ReadJsonFile(f.config_path);
  Require(cfg.is_object(), ErrorCode::kInvalidArgument, "config must be a JSON object");
  RunConfig rc;
  try {
    std::string loss = cfg.value("loss", std::string("2cl"));
    if (f.o_loss->count()) loss = f.loss;
    rc.loss = ParseLossKind(loss);
    rc.weights = DefaultWeights(rc.loss);
    if (cfg.contains("weights")) rc.weights = WeightsFromJson(cfg["weights"], rc.weights);
    std::size_t dft = f.dft_size;
    std::optional<std::size_t> hop;
    if (cfg.contains("stft")) {
      const auto& st = cfg["stft"];
      if (!f.o_dft->count()) dft = st.value("dft_size", dft);
      if (st.contains("hop")) hop = st["hop"].get<std::size_t>();
    }
    if (f.o_hop->count()) hop = f.hop;
    rc.stft.dft_size = dft;
    rc.stft.hop = hop.value_or(dft / 2);
    rc.format = cfg.value("format", rc.format);
    rc.seed = cfg.value("seed", rc.seed);
    rc.headroom = cfg.value("headroom", rc.headroom);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  auto& w = rc.weights;
  if (f.o_alpha->count()) w.alpha = f.alpha;
  if (f.o_beta->count()) w.beta = f.beta;
  if (f.o_lambda1->count()) w.lambda1 = f.lambda1;
  if (f.o_lambda2->count()) w.lambda2 = f.lambda2;
  if (f.o_gamma1->count()) w.gamma1 = f.gamma1;
  if (f.o_gamma2->count()) w.gamma2 = f.gamma2;
  if (f.o_lpc->count()) w.lpc_order = f.lpc_order;
  if (f.o_seed->count()) rc.seed = f.seed;
  if (f.o_format->count()) rc.format = f.format;
  if (f.o_headroom->count()) rc.headroom = f.headroom;
  Require(rc.format == "json" || rc.format == "csv", ErrorCode::kInvalidArgument,
          "format must be json or csv");
  Validate(rc.weights, rc.loss);
  Validate(rc.stft);
  rc.stft.k_in = (rc.stft.half_bins() + 3) / 4 * 4;
  return rc;
}

// ---------------------------------------------------------------------------
// Worker pool: runs fn(i) for i in [0, n); results stay indexed by i so
// output order follows the input order. The lowest-index failure is
// rethrown after all workers finish.

void ParallelFor(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  if (jobs > 0) worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void WriteFileAtomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out << content;
    Require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::size_t WriteWavAtomic(const SignalBuffer& x, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  const auto info = WriteWav(x, tmp);
  fs::rename(tmp, path);
  return info.clipped;
}

void Emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    WriteFileAtomic(out_path, text);
}

SignalBuffer Scaled(const SignalBuffer& x, double g) {
  SignalBuffer y = x;
  for (double& v : y.samples) v *= g;
  return y;
}

// Reads an aligned triple; lengths may differ by at most one hop, in which
// case all three are cut to the shortest.
struct Triple {
  SignalBuffer y, s, d;
};

Triple ReadTriple(const std::string& y, const std::string& s, const std::string& d,
                  const StftConfig& cfg) {
  Triple t{ReadWav(y), ReadWav(s), ReadWav(d)};
  const std::size_t lo = std::min({t.y.size(), t.s.size(), t.d.size()});
  const std::size_t hi = std::max({t.y.size(), t.s.size(), t.d.size()});
  Require(hi - lo <= cfg.hop, ErrorCode::kShapeMismatch,
          "input lengths differ by more than one frame (" + std::to_string(hi - lo) +
              " samples)");
  t.y.samples.resize(lo);
  t.s.samples.resize(lo);
  t.d.samples.resize(lo);
  return t;
}

// 16-bit files satisfy y = s + d only to within quantization.
constexpr double kWavAdditivityTol = 1e-2;

RealMatrix ResolveMask(const std::string& spec, const ComponentMagnitudes& c, double alpha) {
  if (spec == "ones") return RealMatrix(c.frames(), c.bins(), 1.0);
  if (spec == "closed-form") return ClosedForm2clMask(c.speech, c.noise, alpha);
  std::ifstream in(spec);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open mask '" + spec + "'");
  auto m = ReadMaskCsv(in);
  Require(m.rows() == c.frames() && m.cols() == c.bins(), ErrorCode::kShapeMismatch,
          "mask is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
              ", spectra are " + std::to_string(c.frames()) + "x" + std::to_string(c.bins()));
  return m;
}

// ---------------------------------------------------------------------------
// mix

struct MixArgs {
  Flags flags;
  std::string manifest, out_dir;
  std::size_t jobs = 0;
};

int CmdMix(const MixArgs& a) {
  const auto rc = Resolve(a.flags);
  const fs::path manifest(a.manifest);
  const auto rows = ParseManifest(ReadJsonFile(manifest), manifest.parent_path());
  fs::create_directories(a.out_dir);
  std::vector<Json> meta(rows.size());
  ParallelFor(rows.size(), a.jobs, [&](std::size_t i) {
    const auto& r = rows[i];
    auto mix = MixAtSnr(ReadWav(r.clean_path), ReadWav(r.noise_path), r.snr_db, r.seed);
    if (rc.headroom) {
      mix.noisy = Scaled(mix.noisy, 0.5);
      mix.speech = Scaled(mix.speech, 0.5);
      mix.noise = Scaled(mix.noise, 0.5);
    }
    char stem[32];
    std::snprintf(stem, sizeof stem, "%04zu", i);
    const fs::path base = fs::path(a.out_dir) / stem;
    const std::size_t cy = WriteWavAtomic(mix.noisy, base.string() + "_noisy.wav");
    const std::size_t cs = WriteWavAtomic(mix.speech, base.string() + "_clean.wav");
    const std::size_t cd = WriteWavAtomic(mix.noise, base.string() + "_noise.wav");
    // re-measure from what was written
    const auto s = ReadWav(base.string() + "_clean.wav");
    const auto d = ReadWav(base.string() + "_noise.wav");
    meta[i] = Json{{"row", i},
                   {"clean", r.clean_path},
                   {"noise", r.noise_path},
                   {"snr_db", r.snr_db},
                   {"seed", r.seed},
                   {"measured_snr_db", ActiveSpeechLevelDb(s) - PowerDb(MeanPower(d.view()))},
                   {"gain", mix.gain},
                   {"noise_offset", mix.noise_offset},
                   {"headroom", rc.headroom},
                   {"clipped", {{"noisy", cy}, {"clean", cs}, {"noise", cd}}},
                   {"files",
                    {{"noisy", base.string() + "_noisy.wav"},
                     {"clean", base.string() + "_clean.wav"},
                     {"noise", base.string() + "_noise.wav"}}}};
  });
  Json out = Json::array();
  for (auto& m : meta) out.push_back(std::move(m));
  WriteFileAtomic(fs::path(a.out_dir) / "metadata.json", out.dump(2) + "\n");
  std::cout << "mixed " << rows.size() << " utterance(s) into " << a.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// loss

struct TripleArgs {
  std::string noisy, speech, noise;
};

struct LossArgs {
  Flags flags;
  TripleArgs in;
  std::string mask = "ones";
  std::string out;
};

int CmdLoss(const LossArgs& a) {
  const auto rc = Resolve(a.flags);
  const auto t = ReadTriple(a.in.noisy, a.in.speech, a.in.noise, rc.stft);
  const auto y = Analyze(t.y, rc.stft), s = Analyze(t.s, rc.stft), d = Analyze(t.d, rc.stft);
  const auto c = MagnitudesOf(y, s, d);
  const auto mask = ResolveMask(a.mask, c, rc.weights.alpha);
  ApplyMask(y, s, d, mask, kWavAdditivityTol);
  const auto ctx =
      MakeLossContext(rc.loss, c, rc.weights, rc.stft.dft_size, &rc.stft, t.s.view());
  const auto r = EvaluateLoss(rc.loss, c, mask, rc.weights, ctx);
  const auto report = LossReportJson(rc.loss, rc.weights, r);
  std::cout << ToString(rc.loss) << " total " << std::setprecision(12) << r.total << "\n";
  if (!a.out.empty()) WriteFileAtomic(a.out, report.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradArgs {
  Flags flags;
  std::string losses = "all";
  std::size_t trials = 1;
  std::size_t frames = 40;
  std::string out;
};

int CmdGradcheck(const GradArgs& a) {
  Flags f = a.flags;
  const bool all = a.losses == "all";
  if (all) f.o_loss->clear();
  const auto rc = Resolve(f);
  std::vector<LossKind> kinds;
  if (all)
    kinds.assign(std::begin(kAllLosses), std::end(kAllLosses));
  else
    kinds.push_back(rc.loss);
  GradCheckOptions o;
  o.dft_size = rc.stft.dft_size;
  o.frames = a.frames;
  std::ostringstream os;
  Json table = Json::array();
  bool ok = true;
  if (rc.format == "csv")
    os << "loss,trials,checked,near_kink,excluded,max_rel_error,max_rel_error_near_kink,status\n";
  for (LossKind kind : kinds) {
    LossWeights w = DefaultWeights(kind);
    if (!all) w = rc.weights;
    const auto s = RunGradCheck(kind, a.trials, rc.seed, o, w);
    ok = ok && s.worst.pass;
    const char* status = s.worst.pass ? "PASS" : "FAIL";
    if (rc.format == "csv") {
      os << ToString(kind) << ',' << s.trials << ',' << s.worst.checked << ','
         << s.worst.near_kink << ',' << s.worst.excluded << ',' << std::setprecision(6)
         << std::scientific << s.worst.max_rel_error << ',' << s.worst.max_rel_error_near_kink
         << std::defaultfloat << ',' << status << '\n';
    } else {
      table.push_back({{"loss", ToString(kind)},
                       {"trials", s.trials},
                       {"checked", s.worst.checked},
                       {"near_kink", s.worst.near_kink},
                       {"excluded", s.worst.excluded},
                       {"max_rel_error", s.worst.max_rel_error},
                       {"max_rel_error_near_kink", s.worst.max_rel_error_near_kink},
                       {"status", status}});
    }
  }
  if (rc.format == "json")
    os << Json{{"dft_size", o.dft_size}, {"frames", o.frames}, {"seed", rc.seed},
               {"tolerance", o.tolerance}, {"kink_tolerance", o.kink_tolerance},
               {"results", table}}
              .dump(2)
       << "\n";
  Emit(os.str(), a.out);
  return ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// optimize

struct OptArgs {
  Flags flags;
  TripleArgs in;
  std::string out, trace;
  std::size_t max_iterations = 2000;
  std::string init = "ones";
};

int CmdOptimize(const OptArgs& a) {
  const auto rc = Resolve(a.flags);
  const auto t = ReadTriple(a.in.noisy, a.in.speech, a.in.noise, rc.stft);
  const auto y = Analyze(t.y, rc.stft), s = Analyze(t.s, rc.stft), d = Analyze(t.d, rc.stft);
  const auto c = MagnitudesOf(y, s, d);
  const auto ctx =
      MakeLossContext(rc.loss, c, rc.weights, rc.stft.dft_size, &rc.stft, t.s.view());
  OptimizeConfig cfg;
  cfg.loss = rc.loss;
  cfg.weights = rc.weights;
  cfg.max_iterations = a.max_iterations;
  cfg.init = a.init == "zeros" ? MaskInit::kZeros : a.init == "half" ? MaskInit::kHalf
                                                                     : MaskInit::kOnes;
  const auto r = OptimizeMask(c, ctx, cfg);
  std::ostringstream mask;
  WriteMaskCsv(r.mask, mask);
  WriteFileAtomic(a.out, mask.str());
  if (!a.trace.empty()) {
    std::ostringstream tr;
    tr << "iteration,objective\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.trace.size(); ++i) tr << i << ',' << r.trace[i] << '\n';
    WriteFileAtomic(a.trace, tr.str());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < r.trace.size(); ++i) monotone = monotone && r.trace[i] <= r.trace[i - 1];
  std::cout << "iterations " << r.iterations << " converged " << (r.converged ? "yes" : "no")
            << " objective " << std::setprecision(12) << r.trace.back() << "\n";
  return monotone ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  Flags flags;
  std::string manifest, out, history;
  std::size_t epochs = 200;
  std::size_t minibatch = 128;
  double learning_rate = 2e-4;
  std::string update = "sgd";
  double validation_fraction = 0.2;
  std::vector<std::size_t> hidden = {256, 256};
  std::size_t jobs = 0;
};

int CmdTrain(const TrainArgs& a) {
  const auto rc = Resolve(a.flags);
  const fs::path manifest(a.manifest);
  const auto rows = ParseManifest(ReadJsonFile(manifest), manifest.parent_path());
  Require(!rows.empty(), ErrorCode::kPrecondition, "train: manifest is empty");
  std::vector<TrainingUtterance> data(rows.size());
  ParallelFor(rows.size(), a.jobs, [&](std::size_t i) {
    const auto& r = rows[i];
    const auto mix = MixAtSnr(ReadWav(r.clean_path), ReadWav(r.noise_path), r.snr_db, r.seed);
    data[i] = PrepareUtterance(mix.noisy, mix.speech, mix.noise, rc.stft, rc.loss, rc.weights);
  });
  TrainConfig cfg;
  cfg.loss = rc.loss;
  cfg.weights = rc.weights;
  cfg.epochs = a.epochs;
  cfg.minibatch = a.minibatch;
  cfg.learning_rate = a.learning_rate;
  cfg.update = a.update == "adam" ? UpdateRule::kAdam : UpdateRule::kSgd;
  cfg.validation_fraction = a.validation_fraction;
  cfg.seed = rc.seed;
  cfg.dft_size = rc.stft.dft_size;
  const auto r = MlpTrain(MakeMlpMaskModel(rc.seed, rc.stft.k_in, a.hidden), data, cfg);
  SaveCheckpoint(r.model, a.out);
  if (!a.history.empty()) {
    std::ostringstream h;
    WriteHistoryCsv(r.history, h);
    WriteFileAtomic(a.history, h.str());
  }
  const auto& first = r.history.front();
  const auto& last = r.history.back();
  std::cout << "epochs " << r.history.size() << " val_loss " << std::setprecision(8)
            << first.val_loss << " -> " << last.val_loss << " lr " << last.learning_rate << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalArgs {
  Flags flags;
  std::string speech, noise, manifest;
  std::string mask = "ones";
  std::string checkpoint;
  std::vector<double> alpha_sweep;
  std::string out;
  std::size_t jobs = 0;
};

struct EvalInput {
  std::string name;
  SignalBuffer s, d;
};

int CmdEvaluate(const EvalArgs& a) {
  const auto rc = Resolve(a.flags);
  std::vector<EvalInput> inputs;
  if (!a.manifest.empty()) {
    const fs::path manifest(a.manifest);
    const auto rows = ParseManifest(ReadJsonFile(manifest), manifest.parent_path());
    inputs.resize(rows.size());
    ParallelFor(rows.size(), a.jobs, [&](std::size_t i) {
      const auto& r = rows[i];
      const auto mix =
          MixAtSnr(ReadWav(r.clean_path), ReadWav(r.noise_path), r.snr_db, r.seed);
      inputs[i] = {fs::path(r.clean_path).stem().string(), mix.speech, mix.noise};
    });
  } else {
    Require(!a.speech.empty() && !a.noise.empty(), ErrorCode::kInvalidArgument,
            "evaluate: give --speech and --noise, or --manifest");
    auto s = ReadWav(a.speech), d = ReadWav(a.noise);
    const std::size_t lo = std::min(s.size(), d.size());
    Require(std::max(s.size(), d.size()) - lo <= rc.stft.hop, ErrorCode::kShapeMismatch,
            "evaluate: speech and noise lengths differ by more than one frame");
    s.samples.resize(lo);
    d.samples.resize(lo);
    inputs.push_back({fs::path(a.speech).stem().string(), std::move(s), std::move(d)});
  }
  std::optional<MlpMaskModel> model;
  if (!a.checkpoint.empty()) model = LoadCheckpoint(a.checkpoint);
  const std::vector<double> alphas =
      a.alpha_sweep.empty() ? std::vector<double>{rc.weights.alpha} : a.alpha_sweep;
  Require(a.alpha_sweep.empty() || (a.mask == "closed-form" && !model),
          ErrorCode::kInvalidArgument, "--alpha-sweep needs --mask closed-form");

  MetricOptions mo;
  mo.stft = rc.stft;
  std::vector<MetricRow> rows(inputs.size() * alphas.size());
  ParallelFor(rows.size(), a.jobs, [&](std::size_t i) {
    const auto& in = inputs[i / alphas.size()];
    const double alpha = alphas[i % alphas.size()];
    SignalBuffer y = in.s;
    for (std::size_t n = 0; n < y.size(); ++n) y.samples[n] += in.d.samples[n];
    const auto ys = Analyze(y, rc.stft);
    RealMatrix mask;
    std::string source;
    if (model) {
      mask = PredictMask(*model, ys);
      source = "model";
    } else {
      const auto c = MagnitudesOf(ys, Analyze(in.s, rc.stft), Analyze(in.d, rc.stft));
      mask = ResolveMask(a.mask, c, alpha);
      source = a.mask == "closed-form" ? "2cl" : a.mask == "ones" ? "ones" : "mask";
    }
    MetricRow& row = rows[i];
    row.utterance = in.name;
    row.snr_in = ActiveSpeechLevelDb(in.s) - PowerDb(MeanPower(in.d.view()));
    row.loss_name = source;
    row.alpha = alpha;
    row.beta = rc.weights.beta;
    row.report = EvaluateMask(in.s, in.d, mask, mo);
  });

  std::ostringstream os;
  if (rc.format == "csv") {
    WriteMetricCsvHeader(os);
    for (const auto& r : rows) WriteMetricCsvRow(r, os);
  } else {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j = ToJson(r.report);
      j["utterance"] = r.utterance;
      j["snr_in"] = r.snr_in;
      j["mask"] = r.loss_name;
      j["alpha"] = r.alpha;
      arr.push_back(std::move(j));
    }
    os << (arr.size() == 1 ? arr[0] : arr).dump(2) << "\n";
  }
  Emit(os.str(), a.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  Flags flags;
  std::string out_dir;
  std::size_t count = 4;
  double duration = 2.0;
  std::string noise = "white";
  std::vector<double> snrs = {-5, 0, 5, 10, 15, 20};
};

int CmdSynth(const SynthArgs& a) {
  const auto rc = Resolve(a.flags);
  fs::create_directories(a.out_dir);
  Json manifest = Json::array();
  const auto kind = ParseNoiseKind(a.noise);
  for (std::size_t i = 0; i < a.count; ++i) {
    SyntheticSpeechOptions so;
    so.duration_s = a.duration;
    const std::uint64_t seed = rc.seed * 1000 + i;
    const auto s = SyntheticSpeech(seed, so);
    const auto d = Scaled(SyntheticNoise(kind, s.size() + kSampleRate, seed + 500), 0.1);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%04zu", i);
    const std::string clean = std::string("clean_") + stem + ".wav";
    const std::string noise = std::string("noise_") + stem + ".wav";
    WriteWavAtomic(s, fs::path(a.out_dir) / clean);
    WriteWavAtomic(d, fs::path(a.out_dir) / noise);
    manifest.push_back(
        {{"clean", clean}, {"noise", noise}, {"snr_db", a.snrs[i % a.snrs.size()]}, {"seed", seed}});
  }
  WriteFileAtomic(fs::path(a.out_dir) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << a.count << " clean/noise pair(s) to " << a.out_dir << "\n";
  return kExitOk;
}

void AddTriple(CLI::App* app, TripleArgs& t) {
  app->add_option("--noisy", t.noisy, "noisy mixture y")->required()->check(CLI::ExistingFile);
  app->add_option("--speech", t.speech, "clean speech s")->required()->check(CLI::ExistingFile);
  app->add_option("--noise", t.noise, "noise d")->required()->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Components-loss toolkit for mask-based speech enhancement"};
  app.require_subcommand(1);

  MixArgs mix;
  auto* c_mix = app.add_subcommand("mix", "mix clean and noise files at target SNRs");
  AddCommonFlags(c_mix, mix.flags);
  c_mix->add_option("--manifest", mix.manifest)->required()->check(CLI::ExistingFile);
  c_mix->add_option("--out-dir", mix.out_dir)->required();
  c_mix->add_option("--jobs", mix.jobs, "worker threads (0 = all cores)");

  LossArgs loss;
  auto* c_loss = app.add_subcommand("loss", "evaluate a loss for a mask");
  AddCommonFlags(c_loss, loss.flags);
  AddTriple(c_loss, loss.in);
  c_loss->add_option("--mask", loss.mask, "mask csv, 'ones' or 'closed-form'");
  c_loss->add_option("--out", loss.out, "per-frame JSON report");

  GradArgs grad;
  auto* c_grad = app.add_subcommand("gradcheck", "compare analytic and numerical gradients");
  AddCommonFlags(c_grad, grad.flags, 16);
  c_grad->get_option("--loss")->default_str("all");
  c_grad->add_option("--trials", grad.trials);
  c_grad->add_option("--frames", grad.frames);
  c_grad->add_option("--out", grad.out);

  OptArgs opt;
  auto* c_opt = app.add_subcommand("optimize", "optimize a mask for a loss");
  AddCommonFlags(c_opt, opt.flags);
  AddTriple(c_opt, opt.in);
  c_opt->add_option("--out", opt.out, "mask csv")->required();
  c_opt->add_option("--trace", opt.trace, "objective trace csv");
  c_opt->add_option("--max-iterations", opt.max_iterations);
  c_opt->add_option("--init", opt.init)->check(CLI::IsMember({"ones", "zeros", "half"}));

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train the MLP mask estimator");
  AddCommonFlags(c_train, train.flags);
  c_train->add_option("--manifest", train.manifest)->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", train.out, "checkpoint JSON")->required();
  c_train->add_option("--history", train.history, "per-epoch csv");
  c_train->add_option("--epochs", train.epochs);
  c_train->add_option("--minibatch", train.minibatch);
  c_train->add_option("--lr", train.learning_rate);
  c_train->add_option("--update", train.update)->check(CLI::IsMember({"sgd", "adam"}));
  c_train->add_option("--validation-fraction", train.validation_fraction);
  c_train->add_option("--hidden", train.hidden)->delimiter(',');
  c_train->add_option("--jobs", train.jobs);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "white-box metrics for a mask or model");
  AddCommonFlags(c_eval, eval.flags);
  c_eval->add_option("--speech", eval.speech)->check(CLI::ExistingFile);
  c_eval->add_option("--noise", eval.noise)->check(CLI::ExistingFile);
  c_eval->add_option("--manifest", eval.manifest)->check(CLI::ExistingFile);
  c_eval->add_option("--mask", eval.mask, "mask csv, 'ones' or 'closed-form'");
  c_eval->add_option("--checkpoint", eval.checkpoint)->check(CLI::ExistingFile);
  c_eval->add_option("--alpha-sweep", eval.alpha_sweep)->delimiter(',');
  c_eval->add_option("--out", eval.out);
  c_eval->add_option("--jobs", eval.jobs);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write synthetic speech/noise pairs and a manifest");
  AddCommonFlags(c_synth, synth.flags);
  c_synth->add_option("--out-dir", synth.out_dir)->required();
  c_synth->add_option("--count", synth.count);
  c_synth->add_option("--duration", synth.duration);
  c_synth->add_option("--noise", synth.noise)
      ->check(CLI::IsMember({"white", "pink", "babble", "modulated"}));
  c_synth->add_option("--snr", synth.snrs)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_mix) return CmdMix(mix);
    if (*c_loss) return CmdLoss(loss);
    if (*c_grad) {
      grad.losses = c_grad->get_option("--loss")->count() ? grad.flags.loss : "all";
      return CmdGradcheck(grad);
    }
    if (*c_opt) return CmdOptimize(opt);
    if (*c_train) return CmdTrain(train);
    if (*c_eval) return CmdEvaluate(eval);
    if (*c_synth) return CmdSynth(synth);
  } catch (const Error& e) {
    std::cerr << "error [" << ToString(e.code()) << "]: " << e.what() << "\n";
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
