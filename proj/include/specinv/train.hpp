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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "specinv/dsp.hpp"
#include "specinv/losses.hpp"
#include "specinv/mcnn.hpp"

namespace specinv {

struct TrainConfig {
  double lr0 = 0.0005;
  double decay = 0.94;
  std::size_t decay_every = 5000;
  std::size_t batch_size = 16;
  std::size_t segment_frames = 64;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;

  // lr0 * decay^floor(iter / decay_every)
  double learning_rate(std::size_t iter) const;
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// One bias-corrected Adam update at 0-based iteration `iter`.
void adam_step(McnnParams& params, const McnnParams& grads, AdamState& state, std::size_t iter,
               const TrainConfig& config);

struct IterationMetrics {
  std::size_t iter = 0;
  LossBreakdown loss;  // batch mean
  double lr = 0.0;
};

struct TrainHooks {
  const Waveform* heldout = nullptr;
  std::size_t eval_every = 0;  // 0 disables held-out evaluation
  std::function<void(const IterationMetrics&)> on_iteration;
  std::function<void(std::size_t iter, double sc_db)> on_eval;
  // Worker threads for per-item gradients. Reduction order is fixed, so the
  // result does not depend on this value.
  std::size_t threads = 1;
};

struct TrainResult {
  McnnParams params;
  std::vector<IterationMetrics> log;
  std::vector<std::pair<std::size_t, double>> heldout_sc_db;
};

// Throws ValidationError naming the offending clip when a clip is too short
// or its sample rate differs from the STFT configuration.
void validate_corpus(const std::vector<Waveform>& corpus, const StftConfig& stft,
                     std::size_t segment_frames);

TrainResult train(const std::vector<Waveform>& corpus, const StftConfig& stft,
                  const McnnConfig& mcnn, const TrainConfig& config, const LossWeights& weights,
                  const LossConfig& loss_config, const TrainHooks& hooks = {});

// Continues from existing parameters; iteration numbering starts at 0.
TrainResult train_from(McnnParams initial, const std::vector<Waveform>& corpus,
                       const StftConfig& stft, const TrainConfig& config,
                       const LossWeights& weights, const LossConfig& loss_config,
                       const TrainHooks& hooks = {});

// Spectral convergence of the network's reconstruction of `clip` (cropped to
// a whole number of hops).
double reconstruction_sc(const McnnParams& params, const Waveform& clip, const StftConfig& stft);

// CSV with header iter,total,sc,logmag,if,wphase,lr; values printed with
// round-trip precision.
std::string metrics_csv(const std::vector<IterationMetrics>& log);

}  // namespace specinv
