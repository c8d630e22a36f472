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

#include "specinv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "specinv/error.hpp"

namespace specinv {

namespace {

constexpr double kPi = std::numbers::pi;

// sum_{n=0}^{M-1} exp(-i nu n)
std::complex<double> geometric(double nu, double m) {
  const double half = 0.5 * nu;
  const double den = std::sin(half);
  double ratio;
  if (std::abs(den) < 1e-12) {
    ratio = m * std::cos(half * m) / std::cos(half);
  } else {
    ratio = std::sin(half * m) / den;
  }
  return std::polar(ratio, -half * (m - 1.0));
}

// Transform of the periodic Hann window: 0.5 - 0.25 e^{i2pi n/M} - 0.25 e^{-i2pi n/M}.
std::complex<double> hann_transform(double nu, double m) {
  const double step = 2.0 * kPi / m;
  return 0.5 * geometric(nu, m) - 0.25 * geometric(nu - step, m) -
         0.25 * geometric(nu + step, m);
}

std::vector<double> mean_power(const Waveform& wave, const StftConfig& config) {
  const auto mag = magnitude(stft(wave, config));
  const std::size_t frames = mag.frames();
  // Skip edge frames affected by reflection padding when there are enough.
  const std::size_t skip = frames > 8 ? 2 : 0;
  std::vector<double> power(mag.bins(), 0.0);
  for (std::size_t t = skip; t < frames - skip; ++t) {
    for (std::size_t k = 0; k < mag.bins(); ++k) power[k] += mag.data(t, k) * mag.data(t, k);
  }
  const double n = static_cast<double>(frames - 2 * skip);
  for (double& p : power) p /= n;
  return power;
}

}  // namespace

MagSpectrogram tone_spectrogram(const StftConfig& config, std::span<const double> freqs_hz,
                                double amplitude, std::size_t frames) {
  config.validate();
  const double nyquist = 0.5 * static_cast<double>(config.sample_rate);
  for (double f : freqs_hz) {
    if (!(f > 0.0 && f < nyquist)) {
      throw ValidationError("tone frequency " + std::to_string(f) + " Hz is outside (0, Nyquist)");
    }
  }
  const double m = static_cast<double>(config.win_length);
  const double n_fft = static_cast<double>(config.fft_size);
  std::vector<double> row(config.bins());
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double nu = 2.0 * kPi * static_cast<double>(k) / n_fft;
    std::complex<double> x{0.0, 0.0};
    for (double f : freqs_hz) {
      const double omega = 2.0 * kPi * f / static_cast<double>(config.sample_rate);
      // cos(omega (n - M/2)) = (e^{i omega (n - M/2)} + e^{-i omega (n - M/2)}) / 2
      x += 0.5 * amplitude *
           (std::polar(1.0, -omega * m / 2.0) * hann_transform(nu - omega, m) +
            std::polar(1.0, omega * m / 2.0) * hann_transform(nu + omega, m));
    }
    row[k] = std::abs(x);
  }
  MagSpectrogram spec{Grid<double>(frames, config.bins()), config};
  for (std::size_t t = 0; t < frames; ++t) std::copy(row.begin(), row.end(), spec.data.row(t).begin());
  return spec;
}

SpectrumSummary summarize_spectrum(const Waveform& wave, const StftConfig& config) {
  SpectrumSummary s;
  const auto power = mean_power(wave, config);
  s.mean_magnitude.resize(power.size());
  for (std::size_t k = 0; k < power.size(); ++k) s.mean_magnitude[k] = std::sqrt(power[k]);
  s.dominant_bin = static_cast<std::size_t>(
      std::max_element(s.mean_magnitude.begin(), s.mean_magnitude.end()) - s.mean_magnitude.begin());
  s.dominant_hz = static_cast<double>(s.dominant_bin) * static_cast<double>(config.sample_rate) /
                  static_cast<double>(config.fft_size);
  return s;
}

std::vector<ToneResponse> synth_test(const McnnParams& params, const StftConfig& config,
                                     std::span<const double> freqs_hz, bool superpose,
                                     double amplitude, std::size_t frames) {
  params.config().validate_for(config);
  if (freqs_hz.empty()) throw ValidationError("synth_test needs at least one frequency");

  std::vector<std::vector<double>> groups;
  if (superpose) {
    groups.emplace_back(freqs_hz.begin(), freqs_hz.end());
  } else {
    for (double f : freqs_hz) groups.push_back({f});
  }

  const double bin_hz = static_cast<double>(config.sample_rate) / static_cast<double>(config.fft_size);
  std::vector<ToneResponse> out;
  for (const auto& g : groups) {
    ToneResponse r;
    r.input_freqs = g;
    r.output = mcnn_forward(params, tone_spectrogram(config, g, amplitude, frames));
    r.spectrum = summarize_spectrum(r.output, config);
    const auto& mm = r.spectrum.mean_magnitude;
    double total = 0.0;
    for (double v : mm) total += v * v;
    const double peak = mm[r.spectrum.dominant_bin];
    for (double f : g) {
      ToneTarget t;
      t.freq_hz = f;
      t.bin = static_cast<std::size_t>(std::lround(f / bin_hz));
      double near = 0.0, local_peak = 0.0;
      for (long d = -2; d <= 2; ++d) {
        const long k = static_cast<long>(t.bin) + d;
        if (k < 0 || k >= static_cast<long>(mm.size())) continue;
        near += mm[static_cast<std::size_t>(k)] * mm[static_cast<std::size_t>(k)];
        if (std::abs(d) <= 1) local_peak = std::max(local_peak, mm[static_cast<std::size_t>(k)]);
      }
      t.energy_fraction = total > 0.0 ? near / total : 0.0;
      t.level_db = peak > 0.0 && local_peak > 0.0 ? 20.0 * std::log10(local_peak / peak)
                                                  : -std::numeric_limits<double>::infinity();
      r.targets.push_back(t);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::array<double, 4> octave_band_energy(const Waveform& wave, const StftConfig& config) {
  const auto power = mean_power(wave, config);
  const double nyquist_bin = static_cast<double>(config.fft_size) / 2.0;
  std::array<double, 4> bands{};
  double total = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double rel = static_cast<double>(k) / nyquist_bin;
    const std::size_t band = rel < 0.125 ? 0 : rel < 0.25 ? 1 : rel < 0.5 ? 2 : 3;
    bands[band] += power[k];
    total += power[k];
  }
  if (total > 0.0) {
    for (double& b : bands) b /= total;
  }
  return bands;
}

Waveform peak_normalize(Waveform wave) {
  double peak = 0.0;
  for (double v : wave.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : wave.samples) v /= peak;
  }
  return wave;
}

}  // namespace specinv
