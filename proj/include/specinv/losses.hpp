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

#include <vector>

#include "specinv/dsp.hpp"

namespace specinv {

struct LossWeights {
  double sc = 1.0;
  double logmag = 6.0;
  double instfreq = 10.0;
  double wphase = 1.0;

  void validate() const;
};

enum class Reduction { Mean };

struct LossConfig {
  double eps_log = 1e-5;   // offset inside the log-magnitude loss
  double eps_grad = 1e-8;  // magnitudes at or below this carry no phase and no gradient
  Reduction reduction = Reduction::Mean;

  void validate() const;
};

struct LossBreakdown {
  double sc = 0.0;
  double logmag = 0.0;
  double instfreq = 0.0;
  double wphase = 0.0;
  double total = 0.0;
};

// 20*log10(x); -inf for x == 0.
double to_db(double ratio);

// All four terms from precomputed spectrograms. When grad_est is non-null it
// receives d(total)/d(Re, Im of est), packed as a complex grid.
LossBreakdown spectral_losses(const ComplexSpectrogram& ref, const ComplexSpectrogram& est,
                              const LossWeights& weights, const LossConfig& loss_config,
                              ComplexSpectrogram* grad_est = nullptr);

double spectral_convergence(const Waveform& ref, const Waveform& est, const StftConfig& config);
double spectral_convergence_db(const Waveform& ref, const Waveform& est,
                               const StftConfig& config);
double log_mag_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                    const LossConfig& loss_config = {});
double if_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
               const LossConfig& loss_config = {});
double weighted_phase_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                           const LossConfig& loss_config = {});

LossBreakdown total_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                         const LossWeights& weights = {}, const LossConfig& loss_config = {});

struct LossGradient {
  LossBreakdown loss;
  std::vector<double> grad;  // d(total)/d(est samples)
};

LossGradient total_loss_grad(const Waveform& ref, const Waveform& est, const StftConfig& config,
                             const LossWeights& weights = {}, const LossConfig& loss_config = {});

}  // namespace specinv
