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

#include "specinv/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "specinv/error.hpp"

namespace specinv {

namespace {

constexpr char kSpecMagic[8] = {'S', 'P', 'E', 'C', 'I', 'N', 'V', '1'};
constexpr char kCkptMagic[8] = {'M', 'C', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kSpecVersion = 1;
constexpr std::uint32_t kCkptVersion = 1;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }

  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

// Errors are raised as E with `what` prefixed by the context name.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw IoError(context_ + ": truncated while reading " + what);
    }
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint16_t u16(const char* what) {
    auto s = take(2, what);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto s = take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  void skip(std::size_t n, const char* what) { take(n, what); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw ValidationError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

// WAV ----------------------------------------------------------------------

Waveform wav_decode(std::span<const std::uint8_t> bytes, const std::string& name) {
  Reader r(bytes, name);
  const auto riff = r.take(4, "RIFF header");
  if (std::memcmp(riff.data(), "RIFF", 4) != 0) throw IoError(name + ": missing RIFF chunk");
  r.u32("RIFF size");
  const auto wave = r.take(4, "RIFF form type");
  if (std::memcmp(wave.data(), "WAVE", 4) != 0) throw IoError(name + ": RIFF form is not WAVE");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t sample_rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (r.remaining() >= 8 && !(have_fmt && have_data)) {
    const auto id = r.take(4, "chunk id");
    const std::uint32_t size = r.u32("chunk size");
    const std::string chunk(reinterpret_cast<const char*>(id.data()), 4);
    if (chunk == "fmt ") {
      if (size < 16) throw IoError(name + ": 'fmt ' chunk too small");
      Reader f(r.take(size, "'fmt ' chunk"), name + " 'fmt '");
      format = f.u16("format tag");
      channels = f.u16("channel count");
      sample_rate = f.u32("sample rate");
      f.u32("byte rate");
      block_align = f.u16("block align");
      bits = f.u16("bits per sample");
      if (format == kFormatExtensible) {
        if (size < 40) throw IoError(name + ": extensible 'fmt ' chunk too small");
        f.u16("extension size");
        f.u16("valid bits");
        f.u32("channel mask");
        format = f.u16("sub-format");
      }
      have_fmt = true;
    } else if (chunk == "data") {
      if (!have_fmt) throw IoError(name + ": 'data' chunk precedes 'fmt ' chunk");
      data = r.take(std::min<std::size_t>(size, r.remaining()), "'data' chunk");
      have_data = true;
    } else {
      r.skip(std::min<std::size_t>(size, r.remaining()), "chunk body");
    }
    if (size % 2 == 1 && r.remaining() > 0) r.skip(1, "chunk padding");
  }
  if (!have_fmt) throw IoError(name + ": no 'fmt ' chunk");
  if (!have_data) throw IoError(name + ": no 'data' chunk");
  if (channels == 0 || sample_rate == 0) throw IoError(name + ": 'fmt ' chunk has zero channels or rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw IoError(name + ": 'fmt ' chunk declares unsupported codec (format " +
                  std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  }
  const std::size_t bytes_per_sample = bits / 8;
  if (block_align != bytes_per_sample * channels) {
    throw IoError(name + ": 'fmt ' chunk block alignment is inconsistent");
  }
  const std::size_t frames = data.size() / block_align;

  Waveform w{std::vector<double>(frames, 0.0), sample_rate};
  Reader d(data, name + " 'data'");
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      if (pcm16) {
        acc += static_cast<std::int16_t>(d.u16("sample")) / 32768.0;
      } else {
        const float v = d.f32("sample");
        if (!std::isfinite(v)) throw IoError(name + ": 'data' chunk contains non-finite samples");
        acc += v;
      }
    }
    w.samples[i] = acc / static_cast<double>(channels);
  }
  return w;
}

Waveform wav_read(const std::filesystem::path& path) {
  return wav_decode(read_file(path), path.string());
}

std::vector<std::uint8_t> wav_encode(const Waveform& wave, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t block = bits / 8;
  const std::uint32_t data_size = checked_u32(wave.size() * block, "WAV data size");
  const std::uint32_t rate = checked_u32(wave.sample_rate, "sample rate");

  Writer w;
  w.bytes("RIFF", 4);
  w.u32(36 + data_size);
  w.bytes("WAVE", 4);
  w.bytes("fmt ", 4);
  w.u32(16);
  w.u16(format);
  w.u16(1);
  w.u32(rate);
  w.u32(rate * block);
  w.u16(static_cast<std::uint16_t>(block));
  w.u16(bits);
  w.bytes("data", 4);
  w.u32(data_size);
  for (double x : wave.samples) {
    if (!std::isfinite(x)) throw NumericError("cannot encode non-finite samples");
    if (encoding == WavEncoding::Pcm16) {
      const double clamped = std::clamp(x, -1.0, 32767.0 / 32768.0);
      const long q = std::lround(clamped * 32768.0);
      w.i16(static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767)));
    } else {
      w.f32(static_cast<float>(x));
    }
  }
  return std::move(w.data());
}

void wav_write(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  write_file_atomic(path, wav_encode(wave, encoding));
}

// Spectrogram file ------------------------------------------------------------

std::vector<std::uint8_t> encode_spec_file(const MagSpectrogram& spec) {
  Writer w;
  w.bytes(kSpecMagic, 8);
  w.u32(kSpecVersion);
  w.u32(checked_u32(spec.frames(), "T_spec"));
  w.u32(checked_u32(spec.bins(), "F_spec"));
  w.u32(checked_u32(spec.config.sample_rate, "sample rate"));
  w.u32(checked_u32(spec.config.hop_length, "hop"));
  w.u32(checked_u32(spec.config.win_length, "win"));
  w.u32(checked_u32(spec.config.fft_size, "fft"));
  for (double v : spec.data.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("spectrogram magnitudes must be finite and non-negative");
    }
    w.f32(static_cast<float>(v));
  }
  return std::move(w.data());
}

MagSpectrogram decode_spec_file(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "spectrogram file");
  const auto magic = r.take(8, "magic");
  if (std::memcmp(magic.data(), kSpecMagic, 8) != 0) throw IoError("spectrogram file: bad magic");
  const std::uint32_t version = r.u32("version");
  if (version != kSpecVersion) {
    throw IoError("spectrogram file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t frames = r.u32("T_spec");
  const std::uint32_t bins = r.u32("F_spec");
  StftConfig cfg;
  cfg.sample_rate = r.u32("sample rate");
  cfg.hop_length = r.u32("hop");
  cfg.win_length = r.u32("win");
  cfg.fft_size = r.u32("fft");
  cfg.validate();
  if (bins != cfg.bins()) {
    throw ValidationError("spectrogram file: F_spec " + std::to_string(bins) +
                          " does not match fft/2+1 = " + std::to_string(cfg.bins()));
  }
  const std::uint64_t count = std::uint64_t{frames} * bins;
  if (r.remaining() != count * 4) {
    throw IoError("spectrogram file: payload holds " + std::to_string(r.remaining()) +
                  " bytes, header implies " + std::to_string(count * 4));
  }
  MagSpectrogram spec{Grid<double>(frames, bins), cfg};
  for (double& v : spec.data.values()) {
    const float f = r.f32("magnitude");
    if (!(f >= 0.0f) || !std::isfinite(f)) {
      throw ValidationError("spectrogram file: magnitudes must be finite and non-negative");
    }
    v = f;
  }
  return spec;
}

void write_spec_file(const std::filesystem::path& path, const MagSpectrogram& spec) {
  write_file_atomic(path, encode_spec_file(spec));
}

MagSpectrogram read_spec_file(const std::filesystem::path& path) {
  return decode_spec_file(read_file(path));
}

// Checkpoint ------------------------------------------------------------------

std::vector<std::uint8_t> encode_checkpoint(const McnnParams& params, const StftConfig& stft) {
  const McnnConfig& cfg = params.config();
  Writer w;
  w.bytes(kCkptMagic, 8);
  w.u32(kCkptVersion);
  w.u32(checked_u32(stft.win_length, "win"));
  w.u32(checked_u32(stft.hop_length, "hop"));
  w.u32(checked_u32(stft.fft_size, "fft"));
  w.u32(checked_u32(stft.sample_rate, "sample rate"));
  w.u32(0);  // window kind: Hann
  w.u32(checked_u32(cfg.num_heads, "num_heads"));
  w.u32(checked_u32(cfg.num_layers(), "num_layers"));
  w.u32(checked_u32(cfg.input_channels, "input_channels"));
  w.u32(cfg.input_scaling == InputScaling::Log ? 1 : 0);
  for (const auto& l : cfg.layers) {
    w.u32(checked_u32(l.stride, "stride"));
    w.u32(checked_u32(l.width, "width"));
    w.u32(checked_u32(l.channels, "channels"));
  }
  w.u64(params.size());
  for (double v : params.values()) w.f32(static_cast<float>(v));
  w.u32(crc32_of(w.data()));
  return std::move(w.data());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw IoError("checkpoint: truncated header");
  if (std::memcmp(bytes.data(), kCkptMagic, 8) != 0) throw IoError("checkpoint: bad magic");

  Reader r(bytes, "checkpoint");
  r.skip(8, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kCkptVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.stft.win_length = r.u32("win");
  ck.stft.hop_length = r.u32("hop");
  ck.stft.fft_size = r.u32("fft");
  ck.stft.sample_rate = r.u32("sample rate");
  if (r.u32("window kind") != 0) throw IoError("checkpoint: unknown window kind");

  McnnConfig cfg;
  cfg.num_heads = r.u32("num_heads");
  const std::uint32_t layers = r.u32("num_layers");
  cfg.input_channels = r.u32("input_channels");
  const std::uint32_t scaling = r.u32("input_scaling");
  if (scaling > 1) throw IoError("checkpoint: unknown input scaling");
  cfg.input_scaling = scaling == 1 ? InputScaling::Log : InputScaling::Linear;
  if (layers == 0 || layers > 64) throw IoError("checkpoint: implausible layer count");
  r.need(std::size_t{12} * layers, "layer table");
  cfg.layers.resize(layers);
  for (auto& l : cfg.layers) {
    l.stride = r.u32("stride");
    l.width = r.u32("width");
    l.channels = r.u32("channels");
  }
  const std::uint64_t count = r.u64("parameter count");

  // CRC covers everything before the trailing four bytes.
  if (r.remaining() < 4 || r.remaining() - 4 != count * 4) {
    throw IoError("checkpoint: payload size does not match parameter count (truncated?)");
  }
  const std::uint32_t stored = [&] {
    const auto tail = bytes.subspan(bytes.size() - 4);
    return static_cast<std::uint32_t>(tail[0] | (tail[1] << 8) | (tail[2] << 16) |
                                      (std::uint32_t{tail[3]} << 24));
  }();
  if (crc32_of(bytes.first(bytes.size() - 4)) != stored) {
    throw IoError("checkpoint: CRC mismatch");
  }

  ck.stft.validate();
  cfg.validate_for(ck.stft);
  ck.params = McnnParams(cfg);
  if (ck.params.size() != count) {
    throw ValidationError("checkpoint: parameter count " + std::to_string(count) +
                          " does not match the stored network shape");
  }
  for (double& v : ck.params.values()) {
    const float f = r.f32("parameter");
    if (!std::isfinite(f)) throw NumericError("checkpoint: non-finite parameter");
    v = f;
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const McnnParams& params,
                     const StftConfig& stft) {
  write_file_atomic(path, encode_checkpoint(params, stft));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

McnnParams round_to_f32(const McnnParams& params) {
  McnnParams out = params;
  for (double& v : out.values()) v = static_cast<float>(v);
  return out;
}

}  // namespace specinv
