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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "specinv/dsp.hpp"
#include "specinv/mcnn.hpp"

namespace specinv {

// Magnitude pattern of stationary cosines (amplitude each, phase zero at the
// window centre) under the configured Hann STFT, from the closed-form window
// transform. Every frame is identical.
MagSpectrogram tone_spectrogram(const StftConfig& config, std::span<const double> freqs_hz,
                                double amplitude, std::size_t frames);

struct SpectrumSummary {
  std::vector<double> mean_magnitude;  // per bin, averaged over interior frames
  std::size_t dominant_bin = 0;
  double dominant_hz = 0.0;
};

SpectrumSummary summarize_spectrum(const Waveform& wave, const StftConfig& config);

struct ToneTarget {
  double freq_hz = 0.0;
  std::size_t bin = 0;
  double energy_fraction = 0.0;  // energy within +-2 bins over total
  double level_db = 0.0;         // peak within +-1 bin relative to the global maximum
};

struct ToneResponse {
  std::vector<double> input_freqs;
  Waveform output;
  SpectrumSummary spectrum;
  std::vector<ToneTarget> targets;
};

// Runs the network on analytic tone spectrograms: one response per frequency,
// or a single response for all of them when `superpose` is set.
std::vector<ToneResponse> synth_test(const McnnParams& params, const StftConfig& config,
                                     std::span<const double> freqs_hz, bool superpose,
                                     double amplitude = 0.3, std::size_t frames = 64);

// Energy fractions in four octave bands below Nyquist:
// [0, nyq/8), [nyq/8, nyq/4), [nyq/4, nyq/2), [nyq/2, nyq].
std::array<double, 4> octave_band_energy(const Waveform& wave, const StftConfig& config);

// Scales to unit peak; an all-zero signal is returned unchanged.
Waveform peak_normalize(Waveform wave);

}  // namespace specinv
