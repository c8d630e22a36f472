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

#include "specinv/classic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "specinv/error.hpp"

namespace specinv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogFloor = 1e-12;

// Replace magnitudes with `mag`, keep phases. Zero entries take phase 0.
void project_magnitude(const MagSpectrogram& mag, ComplexSpectrogram& c) {
  auto& z = c.data.values();
  const auto& m = mag.data.values();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]);
    z[i] = a > 0.0 ? z[i] * (m[i] / a) : std::complex<double>(m[i], 0.0);
  }
}

PhaseMatrix initial_phase(const MagSpectrogram& mag, const GlOptions& opts) {
  PhaseMatrix phase{Grid<double>(mag.frames(), mag.bins(), 0.0)};
  switch (opts.phase_init) {
    case PhaseInit::Zero:
      break;
    case PhaseInit::RandomUniform: {
      std::mt19937_64 rng(opts.seed);
      std::uniform_real_distribution<double> dist(-kPi, kPi);
      for (double& p : phase.data.values()) p = wrap_phase(dist(rng));
      break;
    }
    case PhaseInit::Provided:
      if (!opts.phase || opts.phase->data.rows() != mag.frames() ||
          opts.phase->data.cols() != mag.bins()) {
        throw ValidationError("provided phase does not match the magnitude shape");
      }
      phase = *opts.phase;
      break;
  }
  return phase;
}

}  // namespace

void GlOptions::validate() const {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ValidationError("Griffin-Lim momentum must lie in [0, 1)");
  }
  if (phase_init == PhaseInit::Provided && !phase) {
    throw ValidationError("PhaseInit::Provided requires a phase matrix");
  }
}

Waveform griffin_lim(const MagSpectrogram& mag, const GlOptions& opts,
                     const GlObserver& observer) {
  opts.validate();
  mag.config.validate();
  if (mag.frames() == 0) return Waveform{{}, mag.config.sample_rate};

  ComplexSpectrogram projected = from_polar(mag, initial_phase(mag, opts));
  ComplexSpectrogram previous;
  bool have_previous = false;

  for (std::size_t it = 0; it < opts.iterations; ++it) {
    ComplexSpectrogram consistent = stft(istft(projected), mag.config);
    if (observer) observer(it, consistent);

    ComplexSpectrogram next = consistent;
    if (opts.momentum > 0.0 && have_previous) {
      auto& c = next.data.values();
      const auto& prev = previous.data.values();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += opts.momentum * (c[i] - prev[i]);
    }
    previous = std::move(consistent);
    have_previous = true;

    project_magnitude(mag, next);
    projected = std::move(next);
  }
  return istft(projected);
}

PhaseMatrix spsi_phase(const MagSpectrogram& mag) {
  const StftConfig& cfg = mag.config;
  cfg.validate();
  const std::size_t frames = mag.frames();
  const std::size_t bins = mag.bins();
  const double n_fft = static_cast<double>(cfg.fft_size);
  const double hop = static_cast<double>(cfg.hop_length);
  // Linear phase across a peak's main lobe from the window sitting at
  // offset 0 of the zero-padded FFT frame (centre at win/2).
  const double lobe_slope = kPi * static_cast<double>(cfg.win_length) / n_fft;

  PhaseMatrix phase{Grid<double>(frames, bins, 0.0)};
  std::vector<double> acc(bins, 0.0);  // per-bin peak phase of the previous frame
  std::vector<double> next_acc(bins, 0.0);
  std::vector<std::size_t> peaks;

  for (std::size_t t = 0; t < frames; ++t) {
    const auto m = mag.data.row(t);
    peaks.clear();
    for (std::size_t k = 1; k + 1 < bins; ++k) {
      if (m[k] > m[k - 1] && m[k] > m[k + 1]) peaks.push_back(k);
    }
    if (peaks.empty()) {
      if (t > 0) {
        for (std::size_t k = 0; k < bins; ++k) phase.data(t, k) = phase.data(t - 1, k);
      }
      continue;
    }

    std::size_t lo = 0;
    for (std::size_t p = 0; p < peaks.size(); ++p) {
      const std::size_t k = peaks[p];
      std::size_t hi = bins - 1;
      if (p + 1 < peaks.size()) {
        hi = k;
        for (std::size_t j = k + 1; j < peaks[p + 1]; ++j) {
          if (m[j] < m[hi]) hi = j;
        }
      }

      const double alpha = std::log(std::max(m[k - 1], kLogFloor));
      const double beta = std::log(std::max(m[k], kLogFloor));
      const double gamma = std::log(std::max(m[k + 1], kLogFloor));
      const double denom = alpha - 2.0 * beta + gamma;
      const double offset = denom != 0.0 ? 0.5 * (alpha - gamma) / denom : 0.0;
      const double refined = static_cast<double>(k) + offset;

      const double peak_phase = wrap_phase(acc[k] + 2.0 * kPi * refined * hop / n_fft);
      for (std::size_t j = lo; j <= hi; ++j) {
        phase.data(t, j) =
            wrap_phase(peak_phase - lobe_slope * (static_cast<double>(j) - refined));
        next_acc[j] = peak_phase;
      }
      lo = hi + 1;
    }
    acc.swap(next_acc);
  }
  return phase;
}

Waveform spsi(const MagSpectrogram& mag) {
  if (mag.frames() == 0) return Waveform{{}, mag.config.sample_rate};
  return istft(from_polar(mag, spsi_phase(mag)));
}

Waveform spsi_gl(const MagSpectrogram& mag, GlOptions opts) {
  opts.phase_init = PhaseInit::Provided;
  opts.phase = spsi_phase(mag);
  return griffin_lim(mag, opts);
}

}  // namespace specinv
