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

#include "specinv/dsp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "specinv/error.hpp"
#include "specinv/fft.hpp"

namespace specinv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEnvelopeFloor = 1e-12;

void require_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("waveform contains non-finite samples");
  }
}

}  // namespace

void StftConfig::validate() const {
  if (win_length == 0 || hop_length == 0 || fft_size == 0 || sample_rate == 0) {
    throw ValidationError("STFT parameters must be strictly positive");
  }
  if (hop_length > win_length || win_length > fft_size) {
    throw ValidationError("STFT requires hop <= win <= fft (hop=" + std::to_string(hop_length) +
                          ", win=" + std::to_string(win_length) +
                          ", fft=" + std::to_string(fft_size) + ")");
  }
  if (!is_power_of_two(fft_size)) {
    throw ValidationError("fft_size must be a power of two, got " + std::to_string(fft_size));
  }
  if (win_length % hop_length != 0) {
    throw ValidationError("win_length must be a multiple of hop_length");
  }
}

std::vector<double> make_window(const StftConfig& config) {
  config.validate();
  const std::size_t m = config.win_length;
  std::vector<double> w(m);
  for (std::size_t n = 0; n < m; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(n) / static_cast<double>(m)));
  }
  // Keep the center tap exact; cos(pi) is -1 in IEEE arithmetic anyway.
  if (m % 2 == 0) w[m / 2] = 1.0;
  return w;
}

std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  long long r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<long long>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

ComplexSpectrogram stft(const Waveform& s, const StftConfig& config) {
  config.validate();
  if (s.size() < config.hop_length) {
    throw ValidationError("waveform of " + std::to_string(s.size()) +
                          " samples is shorter than hop_length " +
                          std::to_string(config.hop_length));
  }
  require_finite(s.samples);

  const auto window = make_window(config);
  const auto fft = RealFft::get(config.fft_size);
  const std::size_t frames = config.frames_for(s.size());
  const long long pad = static_cast<long long>(config.win_length / 2);

  ComplexSpectrogram out{Grid<std::complex<double>>(frames, config.bins()), config};
  std::vector<double> buf(config.fft_size, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const long long start = static_cast<long long>(t * config.hop_length) - pad;
    for (std::size_t n = 0; n < config.win_length; ++n) {
      buf[n] = window[n] * s.samples[reflect_index(start + static_cast<long long>(n), s.size())];
    }
    fft->forward(buf, out.data.row(t));
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& spec) {
  const StftConfig& config = spec.config;
  config.validate();
  const std::size_t frames = spec.frames();
  const std::size_t hop = config.hop_length;
  const std::size_t win = config.win_length;
  const std::size_t pad = win / 2;
  const std::size_t out_len = frames * hop;

  Waveform out{std::vector<double>(out_len, 0.0), config.sample_rate};
  if (frames == 0) return out;

  const auto window = make_window(config);
  const auto fft = RealFft::get(config.fft_size);
  const std::size_t padded = std::max((frames - 1) * hop + win, pad + out_len);
  std::vector<double> ola(padded, 0.0);
  std::vector<double> env(padded, 0.0);
  std::vector<double> buf(config.fft_size);

  for (std::size_t t = 0; t < frames; ++t) {
    fft->inverse(spec.data.row(t), buf);
    const std::size_t start = t * hop;
    for (std::size_t n = 0; n < win; ++n) {
      ola[start + n] += window[n] * buf[n];
      env[start + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < out_len; ++i) {
    const double e = env[i + pad];
    if (e < kEnvelopeFloor) {
      throw NumericError("overlap-add envelope vanishes at sample " + std::to_string(i) +
                            " (window/hop not COLA)");
    }
    out.samples[i] = ola[i + pad] / e;
  }
  return out;
}

std::vector<double> stft_adjoint(const ComplexSpectrogram& grad, std::size_t samples) {
  const StftConfig& config = grad.config;
  config.validate();
  const auto window = make_window(config);
  const auto fft = RealFft::get(config.fft_size);
  const std::size_t bins = config.bins();
  const long long pad = static_cast<long long>(config.win_length / 2);
  const double n_fft = static_cast<double>(config.fft_size);

  std::vector<double> out(samples, 0.0);
  std::vector<std::complex<double>> herm(bins);
  std::vector<double> buf(config.fft_size);
  for (std::size_t t = 0; t < grad.frames(); ++t) {
    const auto g = grad.data.row(t);
    // d/dx of sum_k Re(conj(G_k) X_k) over the half spectrum equals
    // N * irfft of G with interior bins halved.
    for (std::size_t k = 0; k < bins; ++k) {
      const bool edge = (k == 0 || k == bins - 1);
      herm[k] = edge ? std::complex<double>(g[k].real(), 0.0) : 0.5 * g[k];
    }
    fft->inverse(herm, buf);
    const long long start = static_cast<long long>(t * config.hop_length) - pad;
    for (std::size_t n = 0; n < config.win_length; ++n) {
      out[reflect_index(start + static_cast<long long>(n), samples)] += n_fft * window[n] * buf[n];
    }
  }
  return out;
}

std::pair<MagSpectrogram, PhaseMatrix> polar(const ComplexSpectrogram& spec) {
  MagSpectrogram mag{Grid<double>(spec.frames(), spec.bins()), spec.config};
  PhaseMatrix phase{Grid<double>(spec.frames(), spec.bins())};
  const auto& z = spec.data.values();
  auto& m = mag.data.values();
  auto& p = phase.data.values();
  for (std::size_t i = 0; i < z.size(); ++i) {
    m[i] = std::abs(z[i]);
    if (z[i].real() == 0.0 && z[i].imag() == 0.0) {
      p[i] = 0.0;
    } else {
      double a = std::arg(z[i]);
      if (a <= -kPi) a = kPi;
      p[i] = a;
    }
  }
  return {std::move(mag), std::move(phase)};
}

MagSpectrogram magnitude(const ComplexSpectrogram& spec) {
  MagSpectrogram mag{Grid<double>(spec.frames(), spec.bins()), spec.config};
  const auto& z = spec.data.values();
  auto& m = mag.data.values();
  for (std::size_t i = 0; i < z.size(); ++i) m[i] = std::abs(z[i]);
  return mag;
}

ComplexSpectrogram from_polar(const MagSpectrogram& mag, const PhaseMatrix& phase) {
  if (mag.data.rows() != phase.data.rows() || mag.data.cols() != phase.data.cols()) {
    throw ValidationError("magnitude and phase shapes differ");
  }
  ComplexSpectrogram out{Grid<std::complex<double>>(mag.frames(), mag.bins()), mag.config};
  auto& z = out.data.values();
  const auto& m = mag.data.values();
  const auto& p = phase.data.values();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::polar(m[i], p[i]);
  return out;
}

double wrap_phase(double x) {
  double r = std::remainder(x, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

Grid<double> instantaneous_frequency(const PhaseMatrix& phase) {
  const std::size_t frames = phase.data.rows();
  const std::size_t bins = phase.data.cols();
  if (frames < 2) throw ValidationError("instantaneous frequency needs at least two frames");
  Grid<double> out(frames - 1, bins);
  for (std::size_t t = 0; t + 1 < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      out(t, k) = wrap_phase(phase.data(t + 1, k) - phase.data(t, k));
    }
  }
  return out;
}

}  // namespace specinv
