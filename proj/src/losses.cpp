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

#include "specinv/losses.hpp"

#include <cmath>
#include <limits>

#include "specinv/error.hpp"

namespace specinv {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double phase_of(std::complex<double> z) {
  if (z.real() == 0.0 && z.imag() == 0.0) return 0.0;
  double a = std::arg(z);
  if (a <= -3.141592653589793) a = 3.141592653589793;
  return a;
}

void check_pair(const Waveform& ref, const Waveform& est) {
  if (ref.size() != est.size()) {
    throw ValidationError("reference and estimate lengths differ (" + std::to_string(ref.size()) +
                          " vs " + std::to_string(est.size()) + ")");
  }
  if (ref.sample_rate != est.sample_rate) {
    throw ValidationError("reference and estimate sample rates differ");
  }
}

LossBreakdown waveform_losses(const Waveform& ref, const Waveform& est, const StftConfig& config,
                              const LossWeights& weights, const LossConfig& loss_config) {
  check_pair(ref, est);
  const auto s = stft(ref, config);
  const auto z = stft(est, config);
  return spectral_losses(s, z, weights, loss_config);
}

}  // namespace

void LossWeights::validate() const {
  if (sc < 0 || logmag < 0 || instfreq < 0 || wphase < 0) {
    throw ValidationError("loss weights must be non-negative");
  }
  if (sc + logmag + instfreq + wphase <= 0) {
    throw ValidationError("at least one loss weight must be positive");
  }
}

void LossConfig::validate() const {
  if (!(eps_log > 0) || !(eps_grad > 0)) {
    throw ValidationError("loss epsilons must be positive");
  }
}

double to_db(double ratio) {
  if (ratio == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(ratio);
}

LossBreakdown spectral_losses(const ComplexSpectrogram& ref, const ComplexSpectrogram& est,
                              const LossWeights& weights, const LossConfig& loss_config,
                              ComplexSpectrogram* grad_est) {
  weights.validate();
  loss_config.validate();
  const std::size_t frames = ref.frames();
  const std::size_t bins = ref.bins();
  if (est.frames() != frames || est.bins() != bins) {
    throw ValidationError("spectrogram shapes differ");
  }
  if (frames == 0 || bins == 0) throw ValidationError("empty spectrogram");

  const auto& S = ref.data.values();
  const auto& Z = est.data.values();
  const std::size_t n = S.size();
  const double eps_g = loss_config.eps_grad;

  std::vector<double> mag_s(n), mag_z(n);
  for (std::size_t i = 0; i < n; ++i) {
    mag_s[i] = std::abs(S[i]);
    mag_z[i] = std::abs(Z[i]);
  }

  LossBreakdown out;

  // Spectral convergence.
  double num2 = 0.0, den2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = mag_s[i] - mag_z[i];
    num2 += d * d;
    den2 += mag_s[i] * mag_s[i];
  }
  if (den2 <= 0.0) throw ValidationError("spectral convergence undefined for a silent reference");
  const double num = std::sqrt(num2);
  const double den = std::sqrt(den2);
  out.sc = num / den;

  // Log-magnitude.
  const double eps_l = loss_config.eps_log;
  std::vector<double> logdiff(n);
  double lm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    logdiff[i] = std::log(mag_s[i] + eps_l) - std::log(mag_z[i] + eps_l);
    lm += std::abs(logdiff[i]);
  }
  out.logmag = lm / static_cast<double>(n);

  // Instantaneous frequency.
  const bool have_if = frames >= 2;
  if (!have_if && weights.instfreq > 0) {
    throw ValidationError("instantaneous-frequency loss needs at least two frames");
  }
  std::vector<double> if_sign;
  double if_count = 0.0;
  if (have_if) {
    if_count = static_cast<double>((frames - 1) * bins);
    if_sign.assign((frames - 1) * bins, 0.0);
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < frames; ++t) {
      for (std::size_t k = 0; k < bins; ++k) {
        const std::size_t a = t * bins + k;
        const std::size_t b = a + bins;
        if (mag_s[a] <= eps_g || mag_s[b] <= eps_g || mag_z[a] <= eps_g || mag_z[b] <= eps_g) {
          continue;
        }
        const double if_s = wrap_phase(phase_of(S[b]) - phase_of(S[a]));
        const double if_z = wrap_phase(phase_of(Z[b]) - phase_of(Z[a]));
        const double e = if_s - if_z;
        acc += std::abs(e);
        if_sign[a] = sgn(e);
      }
    }
    out.instfreq = acc / if_count;
  }

  // Weighted phase: |S||Z| - Re(S conj Z) = |S||Z| (1 - cos(dphi)). For
  // Re >= 0 the equivalent Im^2 / (|S||Z| + Re) avoids cancellation.
  std::vector<double> wp_sign(n, 0.0);
  double wp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mag_s[i] <= eps_g || mag_z[i] <= eps_g) continue;
    const double mm = mag_s[i] * mag_z[i];
    const double re = S[i].real() * Z[i].real() + S[i].imag() * Z[i].imag();
    const double im = S[i].imag() * Z[i].real() - S[i].real() * Z[i].imag();
    const double q = re >= 0.0 ? im * im / (mm + re) : mm - re;
    wp += std::abs(q);
    wp_sign[i] = sgn(q);
  }
  out.wphase = wp / static_cast<double>(n);

  out.total = weights.sc * out.sc + weights.logmag * out.logmag +
              weights.instfreq * out.instfreq + weights.wphase * out.wphase;
  if (!std::isfinite(out.total)) throw NumericError("loss evaluated to a non-finite value");

  if (grad_est == nullptr) return out;

  grad_est->config = est.config;
  grad_est->data = Grid<std::complex<double>>(frames, bins);
  auto& G = grad_est->data.values();

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> g_mag(n, 0.0), g_phase(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double gm = 0.0;
    if (weights.sc > 0 && num > 0.0) gm += weights.sc * (mag_z[i] - mag_s[i]) / (num * den);
    if (weights.logmag > 0) gm -= weights.logmag * sgn(logdiff[i]) * inv_n / (mag_z[i] + eps_l);
    g_mag[i] = gm;
  }
  if (have_if && weights.instfreq > 0) {
    const double scale = weights.instfreq / if_count;
    for (std::size_t a = 0; a < if_sign.size(); ++a) {
      if (if_sign[a] == 0.0) continue;
      g_phase[a + bins] -= scale * if_sign[a];
      g_phase[a] += scale * if_sign[a];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mag_z[i];
    if (m <= eps_g) continue;
    const double zr = Z[i].real();
    const double zi = Z[i].imag();
    double gr = g_mag[i] * zr / m - g_phase[i] * zi / (m * m);
    double gi = g_mag[i] * zi / m + g_phase[i] * zr / (m * m);
    if (weights.wphase > 0 && wp_sign[i] != 0.0) {
      const double c = weights.wphase * wp_sign[i] * inv_n;
      gr += c * (mag_s[i] * zr / m - S[i].real());
      gi += c * (mag_s[i] * zi / m - S[i].imag());
    }
    G[i] = {gr, gi};
  }
  return out;
}

double spectral_convergence(const Waveform& ref, const Waveform& est, const StftConfig& config) {
  return waveform_losses(ref, est, config, LossWeights{1, 0, 0, 0}, LossConfig{}).sc;
}

double spectral_convergence_db(const Waveform& ref, const Waveform& est,
                               const StftConfig& config) {
  return to_db(spectral_convergence(ref, est, config));
}

double log_mag_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                    const LossConfig& loss_config) {
  return waveform_losses(ref, est, config, LossWeights{0, 1, 0, 0}, loss_config).logmag;
}

double if_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
               const LossConfig& loss_config) {
  return waveform_losses(ref, est, config, LossWeights{0, 0, 1, 0}, loss_config).instfreq;
}

double weighted_phase_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                           const LossConfig& loss_config) {
  return waveform_losses(ref, est, config, LossWeights{0, 0, 0, 1}, loss_config).wphase;
}

LossBreakdown total_loss(const Waveform& ref, const Waveform& est, const StftConfig& config,
                         const LossWeights& weights, const LossConfig& loss_config) {
  return waveform_losses(ref, est, config, weights, loss_config);
}

LossGradient total_loss_grad(const Waveform& ref, const Waveform& est, const StftConfig& config,
                             const LossWeights& weights, const LossConfig& loss_config) {
  check_pair(ref, est);
  const auto s = stft(ref, config);
  const auto z = stft(est, config);
  ComplexSpectrogram g;
  LossGradient out;
  out.loss = spectral_losses(s, z, weights, loss_config, &g);
  out.grad = stft_adjoint(g, est.size());
  return out;
}

}  // namespace specinv
