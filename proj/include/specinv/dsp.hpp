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

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "specinv/grid.hpp"

namespace specinv {

enum class WindowKind { Hann };

struct StftConfig {
  std::size_t win_length = 1024;
  std::size_t hop_length = 256;
  std::size_t fft_size = 2048;
  std::size_t sample_rate = 16000;
  WindowKind window_kind = WindowKind::Hann;

  std::size_t bins() const { return fft_size / 2 + 1; }
  // Number of frames produced for a signal of the given length.
  std::size_t frames_for(std::size_t samples) const { return samples / hop_length; }

  // Throws ValidationError when the invariants do not hold.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

struct Waveform {
  std::vector<double> samples;
  std::size_t sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Waveform&) const = default;
};

struct ComplexSpectrogram {
  Grid<std::complex<double>> data;  // frames x bins
  StftConfig config;

  std::size_t frames() const { return data.rows(); }
  std::size_t bins() const { return data.cols(); }
};

struct MagSpectrogram {
  Grid<double> data;  // frames x bins, entries >= 0
  StftConfig config;

  std::size_t frames() const { return data.rows(); }
  std::size_t bins() const { return data.cols(); }
};

struct PhaseMatrix {
  Grid<double> data;  // entries in (-pi, pi]
};

// Periodic Hann window of length config.win_length.
std::vector<double> make_window(const StftConfig& config);

// Centered STFT: the signal is reflect-padded by win_length/2 on both sides,
// frame t starts at t*hop of the padded signal and there are
// floor(len/hop) frames.
ComplexSpectrogram stft(const Waveform& s, const StftConfig& config);

// Squared-window normalised overlap-add inverse. Output length is
// frames * hop.
Waveform istft(const ComplexSpectrogram& spec);

// Exact adjoint of stft() as a real-linear map (no envelope division).
// Returns a signal of length `samples`.
std::vector<double> stft_adjoint(const ComplexSpectrogram& grad, std::size_t samples);

std::pair<MagSpectrogram, PhaseMatrix> polar(const ComplexSpectrogram& spec);
MagSpectrogram magnitude(const ComplexSpectrogram& spec);
ComplexSpectrogram from_polar(const MagSpectrogram& mag, const PhaseMatrix& phase);

// Maps x into (-pi, pi].
double wrap_phase(double x);

// Frame-to-frame wrapped phase difference, (frames-1) x bins.
Grid<double> instantaneous_frequency(const PhaseMatrix& phase);

// Reflect index used by the centered frame layout; handles signals shorter
// than the padding by repeated mirroring.
std::size_t reflect_index(long long i, std::size_t n);

}  // namespace specinv
