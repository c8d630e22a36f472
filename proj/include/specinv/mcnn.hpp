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
#include <cstdint>
#include <span>
#include <vector>

#include "specinv/dsp.hpp"
#include "specinv/grid.hpp"

namespace specinv {

enum class InputScaling { Linear, Log };

struct LayerSpec {
  std::size_t stride = 2;
  std::size_t width = 13;
  std::size_t channels = 1;

  bool operator==(const LayerSpec&) const = default;
};

// `count` layers of stride 2 and the given width with 2^(count-l) output
// channels for layer l = 1..count, ending at one channel.
std::vector<LayerSpec> halving_layers(std::size_t count, std::size_t width);

struct McnnConfig {
  std::size_t num_heads = 8;
  std::vector<LayerSpec> layers = halving_layers(8, 13);
  std::size_t input_channels = 1025;
  InputScaling input_scaling = InputScaling::Linear;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t layer_input_channels(std::size_t l) const {
    return l == 0 ? input_channels : layers[l - 1].channels;
  }
  // Product of strides: output samples per input frame.
  std::size_t upsampling() const;

  void validate() const;
  // Also checks the stride product against the hop and the input width
  // against the number of FFT bins.
  void validate_for(const StftConfig& stft) const;

  bool operator==(const McnnConfig&) const = default;
};

// All trainable tensors in one flat buffer. Order: for each head, for each
// layer, kernel (width x c_in x c_out, row-major) then bias (c_out); then the
// head gain. After all heads: a, b of the output softsign.
class McnnParams {
 public:
  McnnParams() = default;
  explicit McnnParams(McnnConfig config);  // zero-filled

  const McnnConfig& config() const { return config_; }

  std::span<double> kernel(std::size_t head, std::size_t layer);
  std::span<const double> kernel(std::size_t head, std::size_t layer) const;
  std::span<double> bias(std::size_t head, std::size_t layer);
  std::span<const double> bias(std::size_t head, std::size_t layer) const;
  double& head_gain(std::size_t head);
  double head_gain(std::size_t head) const;
  double& a() { return values_[values_.size() - 2]; }
  double a() const { return values_[values_.size() - 2]; }
  double& b() { return values_.back(); }
  double b() const { return values_.back(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  bool operator==(const McnnParams&) const = default;

 private:
  std::size_t kernel_offset(std::size_t head, std::size_t layer) const {
    return head * head_stride_ + layer_offsets_[layer];
  }

  McnnConfig config_;
  std::vector<std::size_t> layer_offsets_;  // within a head block
  std::size_t head_stride_ = 0;
  std::vector<double> values_;
};

// Fan-in uniform kernels, zero biases, head gains 1/num_heads, a = b = 1.
McnnParams init_params(const McnnConfig& config, std::uint64_t seed);

// Zero-insertion upsampling by `stride`, full convolution, then a symmetric
// crop of the (width - stride) excess samples with the extra sample taken on
// the left. input: T x c_in, kernel: width x c_in x c_out. Output is
// (stride*T) x c_out with the bias added to every row.
Grid<double> transposed_conv1d(const Grid<double>& input, std::span<const double> kernel,
                               std::span<const double> bias, std::size_t width,
                               std::size_t stride);

// Adjoint of transposed_conv1d. Accumulates into grad_kernel and grad_bias;
// grad_input may be null.
void transposed_conv1d_backward(const Grid<double>& input, std::span<const double> kernel,
                                std::size_t width, std::size_t stride,
                                const Grid<double>& grad_output, Grid<double>* grad_input,
                                std::span<double> grad_kernel, std::span<double> grad_bias);

// Activations kept for the backward pass.
struct ForwardCache {
  Grid<double> input;  // scaled spectrogram, frames x input_channels
  // head_activations[h][l] is the ELU output of layer l of head h.
  std::vector<std::vector<Grid<double>>> head_activations;
  std::vector<double> summed;  // sum of gain-scaled head outputs
  std::vector<double> output;  // after the scaled softsign
};

ForwardCache mcnn_forward_cached(const McnnParams& params, const MagSpectrogram& spec);
Waveform mcnn_forward(const McnnParams& params, const MagSpectrogram& spec);

// Per-head waveforms before the softsign, already multiplied by the head
// gain. Summing them and applying the softsign reproduces mcnn_forward.
std::vector<Waveform> head_outputs(const McnnParams& params, const MagSpectrogram& spec);

double scaled_softsign(double x, double a, double b);

// Gradients of <upstream, output> with respect to every parameter.
McnnParams mcnn_backward(const McnnParams& params, const ForwardCache& cache,
                         std::span<const double> upstream);
McnnParams mcnn_backward(const McnnParams& params, const MagSpectrogram& spec,
                         std::span<const double> upstream);

}  // namespace specinv
