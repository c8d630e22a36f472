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

#include <cstddef>
#include <string_view>

namespace specinv::simd {

enum class Backend { Scalar, Avx2 };

// Inner-loop kernels of the transposed convolution and its adjoints.
struct Kernels {
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += x[i]
  void (*add)(const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();
// Null when the AVX2 translation unit was not compiled in.
const Kernels* avx2_kernels();

bool cpu_supports(Backend backend);

// Kernels in use. Defaults to the best backend the CPU supports; the
// SPECINV_SIMD environment variable ("scalar" or "avx2") overrides it.
const Kernels& active();
Backend active_backend();

// Forces a backend. Throws ValidationError if the CPU lacks support.
void set_backend(Backend backend);

std::string_view backend_name(Backend backend);

}  // namespace specinv::simd
