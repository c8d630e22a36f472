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

#include <cstdint>
#include <functional>
#include <optional>

#include "specinv/dsp.hpp"

namespace specinv {

enum class PhaseInit { Zero, RandomUniform, Provided };

struct GlOptions {
  std::size_t iterations = 50;
  double momentum = 0.0;  // 0 is classic Griffin-Lim; 0.99 is the customary fast-GL value
  PhaseInit phase_init = PhaseInit::Zero;
  std::uint64_t seed = 0;               // RandomUniform
  std::optional<PhaseMatrix> phase;     // Provided

  void validate() const;
};

inline constexpr double kFastGlMomentum = 0.99;

// Called after each iteration with (iteration index, current consistent
// spectrogram STFT(iSTFT(P(c_i)))). Used by the descent tests.
using GlObserver = std::function<void(std::size_t, const ComplexSpectrogram&)>;

Waveform griffin_lim(const MagSpectrogram& mag, const GlOptions& opts,
                     const GlObserver& observer = {});

// Phase estimate of single-pass spectrogram inversion.
PhaseMatrix spsi_phase(const MagSpectrogram& mag);
Waveform spsi(const MagSpectrogram& mag);

// Griffin-Lim initialised from the SPSI phase; opts.phase_init is ignored.
Waveform spsi_gl(const MagSpectrogram& mag, GlOptions opts);

}  // namespace specinv
