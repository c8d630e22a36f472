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

#include <cstdint>
#include <string>
#include <vector>

#include "specinv/dsp.hpp"
#include "specinv/mcnn.hpp"

namespace specinv {

// Algorithmic FLOP counts: a matrix product of m x n by n x p costs 2mnp,
// every pointwise operation (nonlinearities included) costs 1, and a real
// FFT of length N costs 2.5 N log2 N. Memory traffic assumes every operator
// reads its inputs and weights once and writes its outputs once, at 4 bytes
// per real element; complex elements count as two.

struct OpCost {
  std::string label;
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
};

struct CostReport {
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  double intensity = 0.0;  // flops / bytes
  std::vector<OpCost> per_op;

  void add(OpCost op);
};

inline constexpr std::uint64_t kBytesPerElement = 4;

std::uint64_t flops_fft(std::uint64_t n);

struct ConvCost {
  double flops = 0.0;
  double bytes = 0.0;
};

// Layer cost with the trailing ELU. frames may be fractional so that a
// duration need not be a whole number of hops.
ConvCost cost_transposed_conv(double frames, std::uint64_t width, std::uint64_t c_in,
                              std::uint64_t c_out, std::uint64_t stride);

CostReport cost_mcnn(const McnnConfig& mcnn, const StftConfig& stft, double duration_s);
CostReport cost_gl(const StftConfig& stft, std::uint64_t iterations, double duration_s);

// Human-readable table and key=value lines.
std::string format_table(const CostReport& report);
std::string format_kv(const CostReport& report, const std::string& prefix);

}  // namespace specinv
