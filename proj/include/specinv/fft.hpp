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
#include <memory>
#include <span>
#include <vector>

namespace specinv {

// Real-input FFT of power-of-two length N, computed through a half-length
// complex transform. Plans are immutable after construction and can be
// shared between threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  // Inverse of forward() with 1/N normalisation. The imaginary parts of
  // the DC and Nyquist bins are ignored (Hermitian extension).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  // Cached plan for a given size.
  static std::shared_ptr<const RealFft> get(std::size_t n);

 private:
  void complex_fft(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t n_;
  std::size_t half_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // exp(-2 pi i k / half), k < half/2
  std::vector<std::complex<double>> post_;     // exp(-2 pi i k / N), k <= half
};

bool is_power_of_two(std::size_t n);

}  // namespace specinv
