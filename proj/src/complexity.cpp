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

#include "specinv/complexity.hpp"

#include <cmath>
#include <cstdio>

#include "specinv/error.hpp"
#include "specinv/fft.hpp"

namespace specinv {

namespace {

std::uint64_t round_count(double x) { return static_cast<std::uint64_t>(std::llround(x)); }

OpCost make_op(std::string label, double flops, double elements) {
  return OpCost{std::move(label), round_count(flops),
                round_count(elements * static_cast<double>(kBytesPerElement))};
}

double frames_for_duration(const StftConfig& stft, double duration_s) {
  if (!(duration_s > 0.0)) throw ValidationError("duration must be positive");
  return duration_s * static_cast<double>(stft.sample_rate) / static_cast<double>(stft.hop_length);
}

}  // namespace

void CostReport::add(OpCost op) {
  flops += op.flops;
  bytes += op.bytes;
  intensity = bytes > 0 ? static_cast<double>(flops) / static_cast<double>(bytes) : 0.0;
  per_op.push_back(std::move(op));
}

std::uint64_t flops_fft(std::uint64_t n) {
  if (!is_power_of_two(n)) {
    throw ValidationError("flops_fft expects a power of two, got " + std::to_string(n));
  }
  std::uint64_t log2n = 0;
  while ((std::uint64_t{1} << log2n) < n) ++log2n;
  // 2.5 * n * log2(n), exact in integers: 5 * n * log2(n) is even for n >= 2.
  return 5 * n * log2n / 2;
}

ConvCost cost_transposed_conv(double frames, std::uint64_t width, std::uint64_t c_in,
                              std::uint64_t c_out, std::uint64_t stride) {
  const double w = static_cast<double>(width);
  const double ci = static_cast<double>(c_in);
  const double co = static_cast<double>(c_out);
  const double s = static_cast<double>(stride);
  ConvCost c;
  c.flops = 2.0 * w * ci * co * frames + s * frames * co;
  c.bytes = static_cast<double>(kBytesPerElement) *
            (frames * ci + s * frames * co + w * ci * co + co);
  return c;
}

CostReport cost_mcnn(const McnnConfig& mcnn, const StftConfig& stft, double duration_s) {
  mcnn.validate_for(stft);
  const double frames = frames_for_duration(stft, duration_s);
  const double heads = static_cast<double>(mcnn.num_heads);
  CostReport report;

  double t_in = frames;
  for (std::size_t l = 0; l < mcnn.num_layers(); ++l) {
    const auto& s = mcnn.layers[l];
    const ConvCost c = cost_transposed_conv(t_in, s.width, mcnn.layer_input_channels(l),
                                            s.channels, s.stride);
    report.add(OpCost{"layer" + std::to_string(l + 1), round_count(heads * c.flops),
                      round_count(heads * c.bytes)});
    t_in *= static_cast<double>(s.stride);
  }
  const double samples = t_in;
  report.add(make_op("head_gain", heads * samples, heads * (2.0 * samples) + heads));
  report.add(make_op("head_sum", (heads - 1.0) * samples, heads * samples + samples));
  // b*x, |.|, +1, a*x, divide
  report.add(make_op("softsign", 5.0 * samples, 2.0 * samples + 2.0));
  return report;
}

CostReport cost_gl(const StftConfig& stft, std::uint64_t iterations, double duration_s) {
  stft.validate();
  if (iterations == 0) throw ValidationError("cost_gl needs at least one iteration");
  const double frames = frames_for_duration(stft, duration_s);
  const double it = static_cast<double>(iterations);
  const double bins = static_cast<double>(stft.bins());
  const double nfft = static_cast<double>(stft.fft_size);
  const double win = static_cast<double>(stft.win_length);
  const double samples = frames * static_cast<double>(stft.hop_length);
  const double fft = static_cast<double>(flops_fft(stft.fft_size));
  const double spec = 2.0 * frames * bins;  // complex spectrogram, real elements

  CostReport report;
  // square, square, add, sqrt, divide, two multiplies, zero guard
  report.add(make_op("magnitude_projection", it * 8.0 * frames * bins,
                     it * (spec + frames * bins + spec)));
  report.add(make_op("inverse_fft", it * frames * fft, it * (spec + frames * nfft)));
  // window multiply + accumulate per frame sample, envelope divide per output sample
  report.add(make_op("overlap_add", it * (2.0 * frames * win + samples),
                     it * (frames * win + win + samples)));
  report.add(make_op("framing", it * frames * win, it * (samples + win + frames * nfft)));
  report.add(make_op("forward_fft", it * frames * fft, it * (frames * nfft + spec)));
  return report;
}

std::string format_table(const CostReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %18s %16s %12s\n", "op", "flops", "bytes", "flops/byte");
  out += line;
  for (const auto& op : report.per_op) {
    std::snprintf(line, sizeof line, "%-22s %18llu %16llu %12.3f\n", op.label.c_str(),
                  static_cast<unsigned long long>(op.flops),
                  static_cast<unsigned long long>(op.bytes),
                  op.bytes ? static_cast<double>(op.flops) / static_cast<double>(op.bytes) : 0.0);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-22s %18llu %16llu %12.3f\n", "total",
                static_cast<unsigned long long>(report.flops),
                static_cast<unsigned long long>(report.bytes), report.intensity);
  out += line;
  return out;
}

std::string format_kv(const CostReport& report, const std::string& prefix) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%sflops=%llu\n%sbytes=%llu\n%sintensity=%.6g\n",
                prefix.c_str(), static_cast<unsigned long long>(report.flops), prefix.c_str(),
                static_cast<unsigned long long>(report.bytes), prefix.c_str(), report.intensity);
  out += line;
  return out;
}

}  // namespace specinv
