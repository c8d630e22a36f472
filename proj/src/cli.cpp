// Copyright 2026 The specinv Authors
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

#include "specinv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "specinv/classic.hpp"
#include "specinv/complexity.hpp"
#include "specinv/error.hpp"
#include "specinv/experiments.hpp"
#include "specinv/io.hpp"

namespace specinv::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size()) {
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(x);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return x;
}

StftConfig stft_from_flags(std::size_t hop, std::size_t win, std::size_t fft, std::size_t rate) {
  StftConfig c;
  c.hop_length = hop;
  c.win_length = win;
  c.fft_size = fft;
  c.sample_rate = rate;
  c.validate();
  return c;
}

std::vector<double> parse_freq_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_real("freqs", item));
  }
  if (out.empty()) throw ValidationError("--freqs needs at least one frequency");
  return out;
}

void check_finite(const Waveform& w, const char* what) {
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " produced non-finite samples");
  }
}

Waveform fit_length(const Waveform& w, std::size_t n, std::ostream& err, const char* name) {
  if (w.size() == n) return w;
  err << "warning: " << name << " has " << w.size() << " samples, reference has " << n
      << "; " << (w.size() > n ? "cropping" : "zero-padding") << "\n";
  Waveform out = w;
  out.samples.resize(n, 0.0);
  return out;
}

// analyze ----------------------------------------------------------------------

struct AnalyzeArgs {
  std::string in, out;
  std::size_t hop = 256, win = 1024, fft = 2048;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const Waveform w = wav_read(a.in);
  const StftConfig cfg = stft_from_flags(a.hop, a.win, a.fft, w.sample_rate);
  const MagSpectrogram mag = magnitude(stft(w, cfg));
  write_spec_file(a.out, mag);
  out << "frames=" << mag.frames() << "\nbins=" << mag.bins() << "\nsample_rate=" << cfg.sample_rate
      << "\n";
  return kOk;
}

// invert -----------------------------------------------------------------------

struct InvertArgs {
  std::string method, in, out, ckpt, ref, phase_from, init = "zero";
  std::size_t iters = 50;
  double momentum = -1.0;  // < 0: method default
  std::uint64_t seed = 0;
};

Waveform run_inversion(const InvertArgs& a, const MagSpectrogram& mag) {
  if (a.method == "mcnn") {
    if (a.ckpt.empty()) throw ValidationError("--method mcnn requires --ckpt");
    const Checkpoint ck = load_checkpoint(a.ckpt);
    if (!(ck.stft == mag.config)) {
      throw ValidationError("checkpoint STFT configuration (hop " + std::to_string(ck.stft.hop_length) +
                            ", fft " + std::to_string(ck.stft.fft_size) +
                            ") differs from the spectrogram's");
    }
    ck.params.config().validate_for(mag.config);
    return mcnn_forward(ck.params, mag);
  }
  if (a.method == "spsi") return spsi(mag);

  GlOptions opts;
  opts.iterations = a.iters;
  opts.seed = a.seed;
  if (a.method == "gl") {
    opts.momentum = 0.0;
  } else if (a.method == "fastgl") {
    opts.momentum = kFastGlMomentum;
  } else if (a.method == "spsi+gl") {
    opts.momentum = 0.0;
  } else {
    throw ValidationError("unknown method '" + a.method + "'");
  }
  if (a.momentum >= 0.0) opts.momentum = a.momentum;

  if (a.method == "spsi+gl") {
    if (!a.phase_from.empty()) throw ValidationError("--phase-from is not valid with spsi+gl");
    return spsi_gl(mag, opts);
  }
  if (!a.phase_from.empty()) {
    const Waveform src = wav_read(a.phase_from);
    auto [m, phase] = polar(stft(src, mag.config));
    if (phase.data.rows() != mag.frames()) {
      throw ValidationError("--phase-from signal yields " + std::to_string(phase.data.rows()) +
                            " frames, spectrogram has " + std::to_string(mag.frames()));
    }
    opts.phase_init = PhaseInit::Provided;
    opts.phase = std::move(phase);
  } else if (a.init == "random") {
    opts.phase_init = PhaseInit::RandomUniform;
  } else if (a.init != "zero") {
    throw ValidationError("--init must be zero or random");
  }
  return griffin_lim(mag, opts);
}

int cmd_invert(const InvertArgs& a, std::ostream& out, std::ostream& err) {
  const MagSpectrogram mag = read_spec_file(a.in);
  const Waveform w = run_inversion(a, mag);
  check_finite(w, a.method.c_str());
  wav_write(a.out, w);
  out << "method=" << a.method << "\nsamples=" << w.size() << "\n";
  if (!a.ref.empty()) {
    const Waveform ref = wav_read(a.ref);
    if (ref.sample_rate != w.sample_rate) throw ValidationError("--ref sample rate differs");
    const Waveform est = fit_length(w, ref.size(), err, "output");
    out << "sc_db=" << fmt_double(spectral_convergence_db(ref, est, mag.config), "%.4f") << "\n";
  }
  return kOk;
}

// eval -------------------------------------------------------------------------

struct EvalArgs {
  std::string ref, est;
  std::size_t hop = 256, win = 1024, fft = 2048;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Waveform ref = wav_read(a.ref);
  Waveform est = wav_read(a.est);
  if (ref.sample_rate != est.sample_rate) {
    throw ValidationError("reference and estimate sample rates differ");
  }
  est = fit_length(est, ref.size(), err, "estimate");
  const StftConfig cfg = stft_from_flags(a.hop, a.win, a.fft, ref.sample_rate);
  const LossBreakdown lb = total_loss(ref, est, cfg);
  out << "sc=" << fmt_double(lb.sc, "%.6f") << "\n";
  out << "sc_db=" << fmt_double(to_db(lb.sc), "%.4f") << "\n";
  out << "logmag=" << fmt_double(lb.logmag, "%.6f") << "\n";
  out << "if=" << fmt_double(lb.instfreq, "%.6f") << "\n";
  out << "wphase=" << fmt_double(lb.wphase, "%.6f") << "\n";
  out << "total=" << fmt_double(lb.total, "%.6f") << "\n";
  return kOk;
}

// train ------------------------------------------------------------------------

struct TrainArgs {
  std::string data, out, config, metrics, heldout;
  std::uint64_t seed = 0;
  std::size_t hop = 256, win = 1024, fft = 2048, sample_rate = 16000;
  std::size_t threads = 1;
  std::size_t eval_every = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const StftConfig stft_cfg = stft_from_flags(a.hop, a.win, a.fft, a.sample_rate);

  std::string text;
  {
    const auto bytes = read_file(a.config);
    text.assign(bytes.begin(), bytes.end());
  }
  TrainFileConfig tc = parse_train_config(text, stft_cfg.bins());
  tc.train.seed = a.seed;
  for (const auto& [k, v] : tc.effective) {
    const bool def = std::find(tc.defaulted.begin(), tc.defaulted.end(), k) != tc.defaulted.end();
    err << "config: " << k << " = " << v << (def ? " (default)" : "") << "\n";
  }
  tc.mcnn.validate_for(stft_cfg);

  if (!fs::is_directory(a.data)) throw IoError("--data " + a.data + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.data)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("--data " + a.data + " contains no .wav files");
  std::vector<Waveform> corpus;
  for (const auto& f : files) {
    corpus.push_back(wav_read(f));
    if (corpus.back().sample_rate != stft_cfg.sample_rate) {
      throw ValidationError(f.string() + " has sample rate " + std::to_string(corpus.back().sample_rate) +
                            ", STFT configuration expects " + std::to_string(stft_cfg.sample_rate));
    }
    if (corpus.back().size() < tc.train.segment_frames * stft_cfg.hop_length) {
      throw ValidationError(f.string() + " is shorter than one training segment (" +
                            std::to_string(tc.train.segment_frames * stft_cfg.hop_length) +
                            " samples)");
    }
  }

  Waveform heldout;
  TrainHooks hooks;
  hooks.threads = a.threads;
  if (!a.heldout.empty()) {
    heldout = wav_read(a.heldout);
    hooks.heldout = &heldout;
    hooks.eval_every = a.eval_every > 0 ? a.eval_every : 100;
    hooks.on_eval = [&](std::size_t iter, double db) {
      err << "heldout iter=" << iter << " sc_db=" << fmt_double(db, "%.4f") << "\n";
    };
  }

  const TrainResult res = train(corpus, stft_cfg, tc.mcnn, tc.train, tc.weights, LossConfig{}, hooks);
  save_checkpoint(a.out, res.params, stft_cfg);
  const std::string metrics_path = a.metrics.empty() ? a.out + ".metrics.csv" : a.metrics;
  const std::string csv = metrics_csv(res.log);
  write_file_atomic(metrics_path, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));

  out << "checkpoint=" << a.out << "\nmetrics=" << metrics_path << "\n";
  if (!res.log.empty()) {
    out << "final_total=" << fmt_double(res.log.back().loss.total) << "\n";
    out << "final_sc_db=" << fmt_double(to_db(res.log.back().loss.sc), "%.4f") << "\n";
  }
  return kOk;
}

// synth-test -------------------------------------------------------------------

struct SynthArgs {
  std::string ckpt, freqs = "500,1000,2000", out_dir;
  bool superpose = false;
  double amplitude = 0.3;
  std::size_t frames = 64;
};

int cmd_synth_test(const SynthArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const auto freqs = parse_freq_list(a.freqs);
  const auto responses = synth_test(ck.params, ck.stft, freqs, a.superpose, a.amplitude, a.frames);
  if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    std::string tag;
    for (double f : r.input_freqs) tag += (tag.empty() ? "" : "_") + fmt_double(f, "%g");
    if (!a.out_dir.empty()) {
      check_finite(r.output, "synth-test");
      wav_write(fs::path(a.out_dir) / ((a.superpose ? "superposed_" : "tone_") + tag + ".wav"), r.output);
    }
    out << "response=" << tag << " dominant_hz=" << fmt_double(r.spectrum.dominant_hz, "%.3f")
        << " dominant_bin=" << r.spectrum.dominant_bin << "\n";
    for (const auto& t : r.targets) {
      out << "response=" << tag << " target_hz=" << fmt_double(t.freq_hz, "%g")
          << " target_bin=" << t.bin << " energy_frac=" << fmt_double(t.energy_fraction, "%.4f")
          << " level_db=" << fmt_double(t.level_db, "%.2f") << "\n";
    }
  }
  return kOk;
}

// heads ------------------------------------------------------------------------

struct HeadsArgs {
  std::string ckpt, in, out_dir;
};

int cmd_heads(const HeadsArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const MagSpectrogram mag = read_spec_file(a.in);
  if (!(ck.stft == mag.config)) throw ValidationError("checkpoint and spectrogram STFT configurations differ");
  ck.params.config().validate_for(mag.config);

  const auto heads = head_outputs(ck.params, mag);
  const Waveform combined = mcnn_forward(ck.params, mag);
  check_finite(combined, "mcnn");

  double max_err = 0.0;
  for (std::size_t n = 0; n < combined.size(); ++n) {
    double sum = 0.0;
    for (const auto& h : heads) sum += h.samples[n];
    const double y = scaled_softsign(sum, ck.params.a(), ck.params.b());
    max_err = std::max(max_err, std::abs(y - combined.samples[n]));
  }

  fs::create_directories(a.out_dir);
  std::string bands_text;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    wav_write(fs::path(a.out_dir) / ("head_" + std::to_string(h + 1) + ".wav"), peak_normalize(heads[h]));
    const auto bands = octave_band_energy(heads[h], mag.config);
    std::string line = "head=" + std::to_string(h + 1);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      line += " band" + std::to_string(b + 1) + "=" + fmt_double(bands[b], "%.4f");
    }
    bands_text += line + "\n";
  }
  wav_write(fs::path(a.out_dir) / "combined.wav", combined);
  write_file_atomic(fs::path(a.out_dir) / "bands.txt",
                    std::span(reinterpret_cast<const std::uint8_t*>(bands_text.data()), bands_text.size()));
  out << bands_text;
  out << "heads=" << heads.size() << "\ndecomposition_max_err=" << fmt_double(max_err, "%.3g") << "\n";
  return kOk;
}

// bench ------------------------------------------------------------------------

struct BenchArgs {
  std::string method = "mcnn", ckpt;
  double duration = 10.0;
  std::size_t iters = 50;
  std::uint64_t seed = 0;
  bool model_only = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (!(a.duration > 0.0)) throw ValidationError("--duration must be positive");
  StftConfig stft_cfg;
  McnnParams params;
  CostReport report;
  if (a.method == "mcnn") {
    if (!a.ckpt.empty()) {
      Checkpoint ck = load_checkpoint(a.ckpt);
      stft_cfg = ck.stft;
      params = std::move(ck.params);
    } else if (!a.model_only) {
      params = init_params(McnnConfig{}, a.seed);
    }
    report = cost_mcnn(a.ckpt.empty() ? McnnConfig{} : params.config(), stft_cfg, a.duration);
  } else if (a.method == "gl") {
    report = cost_gl(stft_cfg, a.iters, a.duration);
  } else {
    throw ValidationError("--method must be mcnn or gl");
  }

  out << format_table(report);
  out << "method=" << a.method << "\nduration_s=" << fmt_double(a.duration, "%g") << "\n";
  out << format_kv(report, "");
  out << "flops_per_audio_second=" << fmt_double(static_cast<double>(report.flops) / a.duration, "%.6g") << "\n";
  if (a.model_only) return kOk;

  const std::size_t samples = static_cast<std::size_t>(a.duration * static_cast<double>(stft_cfg.sample_rate));
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  Waveform noise{std::vector<double>(samples), stft_cfg.sample_rate};
  for (double& v : noise.samples) v = dist(rng);
  const MagSpectrogram mag = magnitude(stft(noise, stft_cfg));

  const auto t0 = std::chrono::steady_clock::now();
  Waveform w;
  if (a.method == "mcnn") {
    w = mcnn_forward(params, mag);
  } else {
    GlOptions opts;
    opts.iterations = a.iters;
    w = griffin_lim(mag, opts);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rate = static_cast<double>(w.size()) / secs;
  out << "wall_s=" << fmt_double(secs, "%.4f") << "\nsamples_per_sec=" << fmt_double(rate, "%.6g")
      << "\nrealtime_factor=" << fmt_double(rate / static_cast<double>(stft_cfg.sample_rate), "%.4g") << "\n";
  return kOk;
}

}  // namespace

TrainFileConfig parse_train_config(const std::string& text, std::size_t input_channels) {
  static const std::vector<std::string> kKeys = {
      "num_heads",   "num_layers", "filter_width",   "lr0",       "decay",
      "decay_every", "batch_size", "segment_frames", "max_iters", "lambda_sc",
      "lambda_logmag", "lambda_if", "lambda_wp",     "input_scaling"};

  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ValidationError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }

  TrainFileConfig out;
  auto get = [&](const std::string& key, const std::string& def) {
    auto it = values.find(key);
    if (it == values.end()) {
      out.defaulted.push_back(key);
      out.effective.emplace_back(key, def);
      return def;
    }
    out.effective.emplace_back(key, it->second);
    return it->second;
  };

  const TrainConfig td;
  const LossWeights wd;
  out.mcnn.num_heads = parse_count("num_heads", get("num_heads", "8"));
  const std::size_t layers = parse_count("num_layers", get("num_layers", "8"));
  const std::size_t width = parse_count("filter_width", get("filter_width", "13"));
  if (layers == 0 || layers > 30) throw ValidationError("num_layers must lie in [1, 30]");
  out.mcnn.layers = halving_layers(layers, width);
  out.mcnn.input_channels = input_channels;
  out.train.lr0 = parse_real("lr0", get("lr0", fmt_double(td.lr0, "%.17g")));
  out.train.decay = parse_real("decay", get("decay", fmt_double(td.decay, "%.17g")));
  out.train.decay_every = parse_count("decay_every", get("decay_every", std::to_string(td.decay_every)));
  out.train.batch_size = parse_count("batch_size", get("batch_size", std::to_string(td.batch_size)));
  out.train.segment_frames =
      parse_count("segment_frames", get("segment_frames", std::to_string(td.segment_frames)));
  out.train.max_iters = parse_count("max_iters", get("max_iters", std::to_string(td.max_iters)));
  out.weights.sc = parse_real("lambda_sc", get("lambda_sc", fmt_double(wd.sc, "%g")));
  out.weights.logmag = parse_real("lambda_logmag", get("lambda_logmag", fmt_double(wd.logmag, "%g")));
  out.weights.instfreq = parse_real("lambda_if", get("lambda_if", fmt_double(wd.instfreq, "%g")));
  out.weights.wphase = parse_real("lambda_wp", get("lambda_wp", fmt_double(wd.wphase, "%g")));
  const std::string scaling = get("input_scaling", "linear");
  if (scaling == "linear") {
    out.mcnn.input_scaling = InputScaling::Linear;
  } else if (scaling == "log") {
    out.mcnn.input_scaling = InputScaling::Log;
  } else {
    throw ValidationError("input_scaling must be 'linear' or 'log', got '" + scaling + "'");
  }
  out.mcnn.validate();
  out.train.validate();
  out.weights.validate();
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrogram inversion toolkit: multi-head CNN synthesis and classic baselines"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "waveform -> magnitude spectrogram file");
  analyze->add_option("--in", an.in, "input WAV")->required();
  analyze->add_option("--out", an.out, "output spectrogram file")->required();
  analyze->add_option("--hop", an.hop, "hop length")->capture_default_str();
  analyze->add_option("--win", an.win, "window length")->capture_default_str();
  analyze->add_option("--fft", an.fft, "FFT size")->capture_default_str();

  InvertArgs inv;
  auto* invert = app.add_subcommand("invert", "magnitude spectrogram file -> waveform");
  invert->add_option("--method", inv.method, "gl|fastgl|spsi|spsi+gl|mcnn")->required();
  invert->add_option("--in", inv.in, "input spectrogram file")->required();
  invert->add_option("--out", inv.out, "output WAV")->required();
  invert->add_option("--iters", inv.iters, "Griffin-Lim iterations")->capture_default_str();
  invert->add_option("--momentum", inv.momentum, "fast Griffin-Lim momentum (fastgl default 0.99)");
  invert->add_option("--ckpt", inv.ckpt, "MCNN checkpoint");
  invert->add_option("--seed", inv.seed, "seed for --init random")->capture_default_str();
  invert->add_option("--init", inv.init, "Griffin-Lim phase init: zero|random")->capture_default_str();
  invert->add_option("--ref", inv.ref, "reference WAV for spectral convergence");
  invert->add_option("--phase-from", inv.phase_from, "debug: initial phase from this WAV's STFT");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "loss terms and spectral convergence between two WAVs");
  eval->add_option("--ref", ev.ref, "reference WAV")->required();
  eval->add_option("--est", ev.est, "estimated WAV")->required();
  eval->add_option("--hop", ev.hop, "hop length")->capture_default_str();
  eval->add_option("--win", ev.win, "window length")->capture_default_str();
  eval->add_option("--fft", ev.fft, "FFT size")->capture_default_str();

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "train an MCNN on a directory of WAVs");
  trn->add_option("--data", tr.data, "directory of training WAVs")->required();
  trn->add_option("--out", tr.out, "output checkpoint")->required();
  trn->add_option("--config", tr.config, "key = value training config")->required();
  trn->add_option("--seed", tr.seed, "random seed")->capture_default_str();
  trn->add_option("--metrics", tr.metrics, "metrics CSV path (default <out>.metrics.csv)");
  trn->add_option("--hop", tr.hop, "hop length")->capture_default_str();
  trn->add_option("--win", tr.win, "window length")->capture_default_str();
  trn->add_option("--fft", tr.fft, "FFT size")->capture_default_str();
  trn->add_option("--sample-rate", tr.sample_rate, "expected corpus sample rate")->capture_default_str();
  trn->add_option("--threads", tr.threads, "worker threads for batch gradients")->capture_default_str();
  trn->add_option("--heldout", tr.heldout, "held-out WAV for periodic spectral convergence");
  trn->add_option("--eval-every", tr.eval_every, "held-out evaluation period (iterations)");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth-test", "run a checkpoint on analytic tone spectrograms");
  synth->add_option("--ckpt", sy.ckpt, "MCNN checkpoint")->required();
  synth->add_option("--freqs", sy.freqs, "comma-separated frequencies in Hz")->capture_default_str();
  synth->add_flag("--superpose", sy.superpose, "one input with all tones superposed");
  synth->add_option("--out-dir", sy.out_dir, "directory for output WAVs");
  synth->add_option("--amplitude", sy.amplitude, "tone amplitude")->capture_default_str();
  synth->add_option("--frames", sy.frames, "spectrogram frames")->capture_default_str();

  HeadsArgs hd;
  auto* heads = app.add_subcommand("heads", "write per-head waveforms and band energies");
  heads->add_option("--ckpt", hd.ckpt, "MCNN checkpoint")->required();
  heads->add_option("--in", hd.in, "input spectrogram file")->required();
  heads->add_option("--out-dir", hd.out_dir, "output directory")->required();

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "modelled cost and measured throughput");
  bench->add_option("--method", bn.method, "mcnn|gl")->capture_default_str();
  bench->add_option("--duration", bn.duration, "audio seconds")->capture_default_str();
  bench->add_option("--iters", bn.iters, "Griffin-Lim iterations")->capture_default_str();
  bench->add_option("--ckpt", bn.ckpt, "MCNN checkpoint (default: random 8-head, 8-layer network)");
  bench->add_option("--seed", bn.seed, "random seed")->capture_default_str();
  bench->add_flag("--model-only", bn.model_only, "print the cost model without running");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }

  try {
    if (*analyze) return cmd_analyze(an, out);
    if (*invert) return cmd_invert(inv, out, err);
    if (*eval) return cmd_eval(ev, out, err);
    if (*trn) return cmd_train(tr, out, err);
    if (*synth) return cmd_synth_test(sy, out);
    if (*heads) return cmd_heads(hd, out);
    if (*bench) return cmd_bench(bn, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  }
  return kValidationError;
}

}  // namespace specinv::cli
