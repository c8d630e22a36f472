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

#include "specinv/mcnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "specinv/error.hpp"
#include "specinv/simd.hpp"

namespace specinv {

namespace {

// Input channels processed per pass over the time axis; keeps one kernel
// slab per tap resident in cache for the 1025-channel first layer.
constexpr std::size_t kChannelBlock = 128;
constexpr double kLogInputOffset = 1e-5;

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

// ELU derivative expressed through its output: 1 for x > 0, e^x = y + 1 otherwise.
double elu_grad_from_output(double y) { return y > 0.0 ? 1.0 : y + 1.0; }

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

std::size_t crop_left(std::size_t width, std::size_t stride) {
  return (width - stride + 1) / 2;
}

Grid<double> scaled_input(const McnnConfig& config, const MagSpectrogram& spec) {
  if (spec.bins() != config.input_channels) {
    throw ValidationError("spectrogram has " + std::to_string(spec.bins()) +
                          " bins but the network expects " +
                          std::to_string(config.input_channels));
  }
  if (spec.frames() == 0) throw ValidationError("spectrogram has no frames");
  Grid<double> x = spec.data;
  for (double& v : x.values()) {
    if (!std::isfinite(v)) throw NumericError("spectrogram contains non-finite values");
    if (config.input_scaling == InputScaling::Log) v = std::log(v + kLogInputOffset);
  }
  return x;
}

}  // namespace

std::vector<LayerSpec> halving_layers(std::size_t count, std::size_t width) {
  std::vector<LayerSpec> layers(count);
  for (std::size_t l = 0; l < count; ++l) {
    layers[l] = LayerSpec{2, width, std::size_t{1} << (count - 1 - l)};
  }
  return layers;
}

std::size_t McnnConfig::upsampling() const {
  std::size_t p = 1;
  for (const auto& l : layers) p *= l.stride;
  return p;
}

void McnnConfig::validate() const {
  if (num_heads == 0) throw ValidationError("num_heads must be at least 1");
  if (layers.empty()) throw ValidationError("network needs at least one layer");
  if (input_channels == 0) throw ValidationError("input_channels must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& s = layers[l];
    if (s.stride == 0 || s.channels == 0) {
      throw ValidationError("layer " + std::to_string(l + 1) + " has a zero stride or channel count");
    }
    if (s.width < s.stride) {
      throw ValidationError("layer " + std::to_string(l + 1) + " width is smaller than its stride");
    }
  }
  if (layers.back().channels != 1) throw ValidationError("last layer must have one channel");
}

void McnnConfig::validate_for(const StftConfig& stft) const {
  validate();
  stft.validate();
  if (upsampling() != stft.hop_length) {
    throw ValidationError("stride product " + std::to_string(upsampling()) +
                          " does not equal hop_length " + std::to_string(stft.hop_length));
  }
  if (input_channels != stft.bins()) {
    throw ValidationError("network input_channels " + std::to_string(input_channels) +
                          " does not match F_spec " + std::to_string(stft.bins()));
  }
}

McnnParams::McnnParams(McnnConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t off = 0;
  for (std::size_t l = 0; l < config_.num_layers(); ++l) {
    layer_offsets_.push_back(off);
    const auto& s = config_.layers[l];
    off += s.width * config_.layer_input_channels(l) * s.channels + s.channels;
  }
  head_stride_ = off + 1;  // + head gain
  values_.assign(head_stride_ * config_.num_heads + 2, 0.0);
}

std::span<double> McnnParams::kernel(std::size_t head, std::size_t layer) {
  const auto& s = config_.layers[layer];
  return {values_.data() + kernel_offset(head, layer),
          s.width * config_.layer_input_channels(layer) * s.channels};
}

std::span<const double> McnnParams::kernel(std::size_t head, std::size_t layer) const {
  const auto& s = config_.layers[layer];
  return {values_.data() + kernel_offset(head, layer),
          s.width * config_.layer_input_channels(layer) * s.channels};
}

std::span<double> McnnParams::bias(std::size_t head, std::size_t layer) {
  const auto k = kernel(head, layer);
  return {k.data() + k.size(), config_.layers[layer].channels};
}

std::span<const double> McnnParams::bias(std::size_t head, std::size_t layer) const {
  const auto k = kernel(head, layer);
  return {k.data() + k.size(), config_.layers[layer].channels};
}

double& McnnParams::head_gain(std::size_t head) {
  return values_[head * head_stride_ + head_stride_ - 1];
}

double McnnParams::head_gain(std::size_t head) const {
  return values_[head * head_stride_ + head_stride_ - 1];
}

McnnParams init_params(const McnnConfig& config, std::uint64_t seed) {
  McnnParams p(config);
  std::mt19937_64 rng(seed);
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    for (std::size_t l = 0; l < config.num_layers(); ++l) {
      const double fan_in =
          static_cast<double>(config.layers[l].width * config.layer_input_channels(l));
      const double bound = std::sqrt(6.0 / fan_in);
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& w : p.kernel(h, l)) w = dist(rng);
    }
    p.head_gain(h) = 1.0 / static_cast<double>(config.num_heads);
  }
  p.a() = 1.0;
  p.b() = 1.0;
  return p;
}

Grid<double> transposed_conv1d(const Grid<double>& input, std::span<const double> kernel,
                               std::span<const double> bias, std::size_t width,
                               std::size_t stride) {
  const std::size_t frames = input.rows();
  const std::size_t c_in = input.cols();
  const std::size_t c_out = bias.size();
  if (kernel.size() != width * c_in * c_out) {
    throw ValidationError("transposed_conv1d kernel shape mismatch");
  }
  if (width < stride) throw ValidationError("transposed_conv1d width smaller than stride");

  const std::size_t out_len = stride * frames;
  const std::size_t left = crop_left(width, stride);
  Grid<double> out(out_len, c_out);
  for (std::size_t r = 0; r < out_len; ++r) {
    std::copy(bias.begin(), bias.end(), out.row(r).begin());
  }

  const auto& k = simd::active();
  for (std::size_t j = 0; j < width; ++j) {
    const double* tap = kernel.data() + j * c_in * c_out;
    for (std::size_t cb = 0; cb < c_in; cb += kChannelBlock) {
      const std::size_t ce = std::min(c_in, cb + kChannelBlock);
      for (std::size_t t = 0; t < frames; ++t) {
        const long long r = static_cast<long long>(stride * t + j) - static_cast<long long>(left);
        if (r < 0 || r >= static_cast<long long>(out_len)) continue;
        double* y = out.data() + static_cast<std::size_t>(r) * c_out;
        const double* x = input.data() + t * c_in;
        for (std::size_t ci = cb; ci < ce; ++ci) {
          if (x[ci] != 0.0) k.axpy(x[ci], tap + ci * c_out, y, c_out);
        }
      }
    }
  }
  return out;
}

void transposed_conv1d_backward(const Grid<double>& input, std::span<const double> kernel,
                                std::size_t width, std::size_t stride,
                                const Grid<double>& grad_output, Grid<double>* grad_input,
                                std::span<double> grad_kernel, std::span<double> grad_bias) {
  const std::size_t frames = input.rows();
  const std::size_t c_in = input.cols();
  const std::size_t c_out = grad_output.cols();
  const std::size_t out_len = stride * frames;
  if (grad_output.rows() != out_len || grad_bias.size() != c_out ||
      grad_kernel.size() != width * c_in * c_out || kernel.size() != grad_kernel.size()) {
    throw ValidationError("transposed_conv1d_backward shape mismatch");
  }
  const std::size_t left = crop_left(width, stride);
  const auto& k = simd::active();

  for (std::size_t r = 0; r < out_len; ++r) {
    k.add(grad_output.data() + r * c_out, grad_bias.data(), c_out);
  }
  if (grad_input) *grad_input = Grid<double>(frames, c_in);

  for (std::size_t j = 0; j < width; ++j) {
    const double* tap = kernel.data() + j * c_in * c_out;
    double* gtap = grad_kernel.data() + j * c_in * c_out;
    for (std::size_t cb = 0; cb < c_in; cb += kChannelBlock) {
      const std::size_t ce = std::min(c_in, cb + kChannelBlock);
      for (std::size_t t = 0; t < frames; ++t) {
        const long long r = static_cast<long long>(stride * t + j) - static_cast<long long>(left);
        if (r < 0 || r >= static_cast<long long>(out_len)) continue;
        const double* gy = grad_output.data() + static_cast<std::size_t>(r) * c_out;
        const double* x = input.data() + t * c_in;
        for (std::size_t ci = cb; ci < ce; ++ci) {
          if (x[ci] != 0.0) k.axpy(x[ci], gy, gtap + ci * c_out, c_out);
        }
        if (grad_input) {
          double* gx = grad_input->data() + t * c_in;
          for (std::size_t ci = cb; ci < ce; ++ci) gx[ci] += k.dot(gy, tap + ci * c_out, c_out);
        }
      }
    }
  }
}

double scaled_softsign(double x, double a, double b) { return a * x / (1.0 + std::abs(b * x)); }

ForwardCache mcnn_forward_cached(const McnnParams& params, const MagSpectrogram& spec) {
  const McnnConfig& cfg = params.config();
  ForwardCache cache;
  cache.input = scaled_input(cfg, spec);
  const std::size_t out_len = spec.frames() * cfg.upsampling();
  cache.summed.assign(out_len, 0.0);
  cache.head_activations.resize(cfg.num_heads);

  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    auto& acts = cache.head_activations[h];
    acts.reserve(cfg.num_layers());
    for (std::size_t l = 0; l < cfg.num_layers(); ++l) {
      const Grid<double>& x = l == 0 ? cache.input : acts.back();
      const auto& s = cfg.layers[l];
      Grid<double> y = transposed_conv1d(x, params.kernel(h, l), params.bias(h, l), s.width, s.stride);
      for (double& v : y.values()) v = elu(v);
      acts.push_back(std::move(y));
    }
    const double gain = params.head_gain(h);
    const auto& last = acts.back().values();
    for (std::size_t n = 0; n < out_len; ++n) cache.summed[n] += gain * last[n];
  }

  cache.output.resize(out_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const double y = scaled_softsign(cache.summed[n], params.a(), params.b());
    if (!std::isfinite(y)) throw NumericError("network output is not finite");
    cache.output[n] = y;
  }
  return cache;
}

Waveform mcnn_forward(const McnnParams& params, const MagSpectrogram& spec) {
  auto cache = mcnn_forward_cached(params, spec);
  return Waveform{std::move(cache.output), spec.config.sample_rate};
}

std::vector<Waveform> head_outputs(const McnnParams& params, const MagSpectrogram& spec) {
  const auto cache = mcnn_forward_cached(params, spec);
  std::vector<Waveform> heads;
  for (std::size_t h = 0; h < params.config().num_heads; ++h) {
    const auto& last = cache.head_activations[h].back().values();
    Waveform w{std::vector<double>(last.size()), spec.config.sample_rate};
    for (std::size_t n = 0; n < last.size(); ++n) w.samples[n] = params.head_gain(h) * last[n];
    heads.push_back(std::move(w));
  }
  return heads;
}

McnnParams mcnn_backward(const McnnParams& params, const ForwardCache& cache,
                         std::span<const double> upstream) {
  const McnnConfig& cfg = params.config();
  const std::size_t out_len = cache.summed.size();
  if (upstream.size() != out_len) {
    throw ValidationError("upstream gradient length " + std::to_string(upstream.size()) +
                          " does not match output length " + std::to_string(out_len));
  }
  McnnParams grads(cfg);
  const double a = params.a();
  const double b = params.b();

  std::vector<double> d_sum(out_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const double s = cache.summed[n];
    const double den = 1.0 + std::abs(b * s);
    const double u = upstream[n];
    grads.a() += u * s / den;
    grads.b() -= u * a * s * s * sgn(b * s) / (den * den);
    d_sum[n] = u * a / (den * den);
  }

  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const auto& acts = cache.head_activations[h];
    const double gain = params.head_gain(h);
    const auto& last = acts.back().values();

    Grid<double> grad(out_len, 1);
    double g_gain = 0.0;
    for (std::size_t n = 0; n < out_len; ++n) {
      g_gain += d_sum[n] * last[n];
      grad.values()[n] = d_sum[n] * gain;
    }
    grads.head_gain(h) = g_gain;

    for (std::size_t l = cfg.num_layers(); l-- > 0;) {
      // Through the ELU.
      const auto& y = acts[l].values();
      auto& g = grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= elu_grad_from_output(y[i]);

      const Grid<double>& x = l == 0 ? cache.input : acts[l - 1];
      const auto& s = cfg.layers[l];
      Grid<double> grad_x;
      transposed_conv1d_backward(x, params.kernel(h, l), s.width, s.stride, grad,
                                 l == 0 ? nullptr : &grad_x, grads.kernel(h, l),
                                 grads.bias(h, l));
      if (l > 0) grad = std::move(grad_x);
    }
  }
  return grads;
}

McnnParams mcnn_backward(const McnnParams& params, const MagSpectrogram& spec,
                         std::span<const double> upstream) {
  return mcnn_backward(params, mcnn_forward_cached(params, spec), upstream);
}

}  // namespace specinv
