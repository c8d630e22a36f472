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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specinv/dsp.hpp"
#include "specinv/mcnn.hpp"

namespace specinv {

enum class WavEncoding { Pcm16, Float32 };

// RIFF/WAVE, PCM16 or IEEE float32, any channel count (averaged to mono).
Waveform wav_read(const std::filesystem::path& path);
Waveform wav_decode(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

// PCM16 clamps to [-1, 1) and rounds to the nearest code.
void wav_write(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::Pcm16);
std::vector<std::uint8_t> wav_encode(const Waveform& wave, WavEncoding encoding = WavEncoding::Pcm16);

// "SPECINV1", u32 version/T/F/sample_rate/hop/win/fft, then T*F float32
// magnitudes in time-major order. All little-endian.
std::vector<std::uint8_t> encode_spec_file(const MagSpectrogram& spec);
MagSpectrogram decode_spec_file(std::span<const std::uint8_t> bytes);
void write_spec_file(const std::filesystem::path& path, const MagSpectrogram& spec);
MagSpectrogram read_spec_file(const std::filesystem::path& path);

// "MCNNCKPT", u32 version, STFT config, network config, u64 parameter count,
// float32 parameters in McnnParams order, trailing CRC32 of everything
// before it.
struct Checkpoint {
  McnnParams params;
  StftConfig stft;
};

std::vector<std::uint8_t> encode_checkpoint(const McnnParams& params, const StftConfig& stft);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const McnnParams& params,
                     const StftConfig& stft);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Parameters as they come back from a checkpoint (rounded to float32).
McnnParams round_to_f32(const McnnParams& params);

// Whole-file helpers. write_file_atomic writes a temporary sibling and
// renames it, so a failed write leaves no partial output.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace specinv
