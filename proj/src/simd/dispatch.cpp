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

#include <atomic>
#include <cstdlib>
#include <string>

#include "specinv/error.hpp"
#include "specinv/simd.hpp"

namespace specinv::simd {

#ifndef SPECINV_HAVE_AVX2
const Kernels* avx2_kernels() { return nullptr; }
#endif

namespace {

Backend detect() {
  if (const char* env = std::getenv("SPECINV_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && cpu_supports(Backend::Avx2)) return Backend::Avx2;
  }
  return cpu_supports(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(SPECINV_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const Kernels& active() {
  return current().load(std::memory_order_relaxed) == Backend::Avx2 ? *avx2_kernels()
                                                                      : scalar_kernels();
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!cpu_supports(backend)) {
    throw ValidationError("SIMD backend " + std::string(backend_name(backend)) +
                          " is not supported on this CPU");
  }
  current().store(backend, std::memory_order_relaxed);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace specinv::simd
