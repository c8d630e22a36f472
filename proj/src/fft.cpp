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

#include "specinv/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "specinv/error.hpp"

namespace specinv {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

RealFft::RealFft(std::size_t n) : n_(n), half_(n / 2) {
  if (!is_power_of_two(n)) {
    throw ValidationError("FFT size must be a power of two, got " + std::to_string(n));
  }
  if (half_ == 0) return;

  bitrev_.resize(half_);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < half_) ++bits;
  for (std::size_t i = 0; i < half_; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }

  const double two_pi = 2.0 * std::numbers::pi;
  twiddle_.resize(std::max<std::size_t>(half_ / 2, 1));
  for (std::size_t k = 0; k < twiddle_.size(); ++k) {
    const double ang = -two_pi * static_cast<double>(k) / static_cast<double>(half_);
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }
  post_.resize(half_ + 1);
  for (std::size_t k = 0; k <= half_; ++k) {
    const double ang = -two_pi * static_cast<double>(k) / static_cast<double>(n_);
    post_[k] = {std::cos(ang), std::sin(ang)};
  }
}

void RealFft::complex_fft(std::span<std::complex<double>> data, bool inverse) const {
  const std::size_t n = half_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    const std::size_t halflen = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < halflen; ++j) {
        std::complex<double> w = twiddle_[j * step];
        if (inverse) w = std::conj(w);
        const std::complex<double> u = data[start + j];
        const std::complex<double> v = data[start + j + halflen] * w;
        data[start + j] = u + v;
        data[start + j + halflen] = u - v;
      }
    }
  }
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (n_ == 1) {
    out[0] = in[0];
    return;
  }
  std::vector<std::complex<double>> z(half_);
  for (std::size_t i = 0; i < half_; ++i) z[i] = {in[2 * i], in[2 * i + 1]};
  complex_fft(z, false);

  const std::complex<double> minus_half_i{0.0, -0.5};
  for (std::size_t k = 0; k <= half_; ++k) {
    const std::complex<double> zk = z[k % half_];
    const std::complex<double> zc = std::conj(z[(half_ - k) % half_]);
    const std::complex<double> even = 0.5 * (zk + zc);
    const std::complex<double> odd = minus_half_i * (zk - zc);
    out[k] = even + post_[k] * odd;
  }
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (n_ == 1) {
    out[0] = in[0].real();
    return;
  }
  auto bin = [&](std::size_t k) {
    if (k == 0 || k == half_) return std::complex<double>(in[k].real(), 0.0);
    return in[k];
  };
  std::vector<std::complex<double>> z(half_);
  const std::complex<double> i_unit{0.0, 1.0};
  for (std::size_t k = 0; k < half_; ++k) {
    const std::complex<double> xk = bin(k);
    const std::complex<double> xc = std::conj(bin(half_ - k));
    const std::complex<double> even = 0.5 * (xk + xc);
    const std::complex<double> odd = 0.5 * (xk - xc) * std::conj(post_[k]);
    z[k] = even + i_unit * odd;
  }
  complex_fft(z, true);
  const double scale = 1.0 / static_cast<double>(half_);
  for (std::size_t i = 0; i < half_; ++i) {
    out[2 * i] = z[i].real() * scale;
    out[2 * i + 1] = z[i].imag() * scale;
  }
}

std::shared_ptr<const RealFft> RealFft::get(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const RealFft>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const RealFft>(n);
  return slot;
}

}  // namespace specinv
