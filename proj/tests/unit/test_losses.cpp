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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corpus.hpp"
#include "oracles.hpp"
#include "specinv/error.hpp"
#include "specinv/losses.hpp"

using namespace specinv;
using specinv::testing::random_signal;

namespace {

constexpr double kPi = std::numbers::pi;

StftConfig fd_config() {
  StftConfig c;
  c.win_length = 64;
  c.hop_length = 16;
  c.fft_size = 64;
  return c;
}

Waveform wave(std::vector<double> x) { return Waveform{std::move(x), 16000}; }

Waveform sine(double hz, std::size_t n) {
  Waveform w{std::vector<double>(n), 16000};
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = 0.5 * std::sin(2.0 * kPi * hz * i / 16000.0);
  return w;
}

ComplexSpectrogram single(std::complex<double> z) {
  ComplexSpectrogram s{Grid<std::complex<double>>(1, 1), StftConfig{}};
  s.data(0, 0) = z;
  return s;
}

}  // namespace

TEST_CASE("all four losses vanish at identical signals") {
  StftConfig cfg;
  const auto s = wave(random_signal(1, 8192, 0.3));
  const auto lb = total_loss(s, s, cfg);
  CHECK(lb.sc == 0.0);
  CHECK(lb.logmag == 0.0);
  CHECK(lb.instfreq == 0.0);
  CHECK(lb.wphase == 0.0);
  CHECK(lb.total == 0.0);
  CHECK(std::isinf(spectral_convergence_db(s, s, cfg)));
  CHECK(spectral_convergence_db(s, s, cfg) < 0);
}

TEST_CASE("spectral convergence anchors") {
  StftConfig cfg;
  const auto s = wave(random_signal(2, 8192, 0.3));
  CHECK(spectral_convergence(s, wave(std::vector<double>(8192, 0.0)), cfg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_convergence_db(s, wave(std::vector<double>(8192, 0.0)), cfg) == doctest::Approx(0.0));
  auto half = s;
  for (double& v : half.samples) v *= 0.5;
  CHECK(std::abs(spectral_convergence(s, half, cfg) - 0.5) < 1e-9);
  CHECK(spectral_convergence_db(s, half, cfg) == doctest::Approx(-6.0206).epsilon(1e-4));
}

TEST_CASE("silent reference and mismatched inputs are rejected") {
  StftConfig cfg;
  const auto z = wave(std::vector<double>(4096, 0.0));
  const auto s = wave(random_signal(3, 4096));
  CHECK_THROWS_AS(spectral_convergence(z, s, cfg), ValidationError);
  CHECK_THROWS_AS(total_loss(s, wave(random_signal(3, 4000)), cfg), ValidationError);
  Waveform other = s;
  other.sample_rate = 22050;
  CHECK_THROWS_AS(total_loss(s, other, cfg), ValidationError);
}

TEST_CASE("log-magnitude loss on single entries") {
  LossConfig lc;
  lc.eps_log = 1e-300;
  const auto lb = spectral_losses(single(1.0), single(std::exp(1.0)), {0, 1, 0, 0}, lc);
  CHECK(lb.logmag == doctest::Approx(1.0).epsilon(1e-12));
  // A second, equal entry keeps the reference non-silent.
  ComplexSpectrogram a{Grid<std::complex<double>>(1, 2), StftConfig{}};
  a.data(0, 1) = 2.0;
  for (double eps : {1e-5, 1e-2, 1.0}) {
    lc.eps_log = eps;
    CHECK(spectral_losses(a, a, {0, 1, 0, 0}, lc).logmag == 0.0);
  }
}

TEST_CASE("weighted phase loss on single entries") {
  CHECK(spectral_losses(single(1.0), single({0.0, 1.0}), {0, 0, 0, 1}, {}).wphase == doctest::Approx(1.0));
  CHECK(spectral_losses(single(1.0), single(-1.0), {0, 0, 0, 1}, {}).wphase == doctest::Approx(2.0));
}

TEST_CASE("weighted phase loss agrees with the cosine form") {
  StftConfig cfg;
  const auto s = wave(random_signal(5, 4096, 0.4));
  const auto e = wave(random_signal(6, 4096, 0.4));
  const auto S = stft(s, cfg), E = stft(e, cfg);
  double cos_form = 0.0;
  for (std::size_t i = 0; i < S.data.size(); ++i) {
    const auto a = S.data.values()[i], b = E.data.values()[i];
    cos_form += std::abs(a) * std::abs(b) * (1.0 - std::cos(std::arg(a) - std::arg(b)));
  }
  cos_form /= static_cast<double>(S.data.size());
  CHECK(std::abs(weighted_phase_loss(s, e, cfg) - cos_form) < 1e-10);
}

TEST_CASE("instantaneous frequency loss") {
  StftConfig cfg;
  const auto s = sine(500.0, 8192);
  auto neg = s;
  for (double& v : neg.samples) v = -v;
  CHECK(if_loss(s, neg, cfg) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(if_loss(s, sine(505.0, 8192), cfg) > 0.0);
}

TEST_CASE("instantaneous frequency loss ignores a global phase rotation") {
  StftConfig cfg;
  const auto S = stft(wave(random_signal(9, 4096)), cfg);
  auto E = S;
  const std::complex<double> rot = std::polar(1.0, 0.7);
  for (auto& v : E.data.values()) v *= rot;
  // Rounding can push a wrapped difference across the +-pi cut; such entries
  // contribute 2pi each and nothing else may differ.
  const auto if_s = instantaneous_frequency(polar(S).second);
  const auto if_e = instantaneous_frequency(polar(E).second);
  double cut_entries = 0.0;
  for (std::size_t i = 0; i < if_s.size(); ++i) {
    const double d = std::abs(if_s.values()[i] - if_e.values()[i]);
    CHECK(std::min(d, std::abs(d - 2.0 * std::numbers::pi)) < 1e-9);
    if (d > std::numbers::pi) cut_entries += 1.0;
  }
  CHECK(cut_entries <= 3.0);
  const double bound = (2.0 * std::numbers::pi * cut_entries + 1e-9) / static_cast<double>(if_s.size());
  CHECK(spectral_losses(S, E, {0, 0, 1, 0}, {}).instfreq <= bound);
  CHECK(spectral_losses(S, E, {0, 0, 0, 1}, {}).wphase > 1e-3);
}

TEST_CASE("instantaneous frequency needs two frames only when weighted") {
  const auto S = single(1.0);
  CHECK_THROWS_AS(spectral_losses(S, S, {1, 6, 10, 1}, {}), ValidationError);
  CHECK_NOTHROW(spectral_losses(S, S, {1, 6, 0, 1}, {}));
}

TEST_CASE("total loss combines the separately computed terms") {
  StftConfig cfg;
  const auto s = wave(random_signal(10, 4096, 0.5));
  const auto e = wave(random_signal(11, 4096, 0.5));
  const auto lb = total_loss(s, e, cfg, {1, 6, 10, 1});
  const double manual = spectral_convergence(s, e, cfg) + 6.0 * log_mag_loss(s, e, cfg) +
                        10.0 * if_loss(s, e, cfg) + weighted_phase_loss(s, e, cfg);
  CHECK(std::abs(lb.total - manual) < 1e-12 * std::max(1.0, manual));
  CHECK(total_loss(s, e, cfg, {1, 0, 0, 0}).total == lb.sc);
  CHECK(lb.sc >= 0);
  CHECK(lb.logmag >= 0);
  CHECK(lb.instfreq >= 0);
  CHECK(lb.wphase >= 0);
}

TEST_CASE("spectral convergence is invariant to a joint sign flip") {
  StftConfig cfg;
  auto s = wave(random_signal(12, 4096));
  auto e = wave(random_signal(13, 4096));
  const double a = spectral_convergence(s, e, cfg);
  for (double& v : s.samples) v = -v;
  for (double& v : e.samples) v = -v;
  CHECK(spectral_convergence(s, e, cfg) == doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("loss weights and config validation") {
  CHECK_THROWS_AS((LossWeights{0, 0, 0, 0}.validate()), ValidationError);
  CHECK_THROWS_AS((LossWeights{-1, 0, 0, 0}.validate()), ValidationError);
  LossConfig lc;
  lc.eps_log = 0.0;
  CHECK_THROWS_AS(lc.validate(), ValidationError);
}

TEST_CASE("gradient at the minimum of spectral convergence vanishes") {
  const auto cfg = fd_config();
  const auto s = wave(random_signal(14, 512));
  const auto g = total_loss_grad(s, s, cfg, {1, 0, 0, 0});
  double norm = 0.0;
  for (double v : g.grad) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("gradient is linear in the loss weights") {
  const auto cfg = fd_config();
  const auto s = wave(random_signal(15, 512));
  const auto e = wave(random_signal(16, 512));
  const LossWeights w{1, 6, 10, 1};
  const auto total = total_loss_grad(s, e, cfg, w);
  std::vector<double> sum(512, 0.0);
  const LossWeights parts[4] = {{1, 0, 0, 0}, {0, 6, 0, 0}, {0, 0, 10, 0}, {0, 0, 0, 1}};
  for (const auto& p : parts) {
    const auto g = total_loss_grad(s, e, cfg, p);
    for (std::size_t i = 0; i < 512; ++i) sum[i] += g.grad[i];
  }
  for (std::size_t i = 0; i < 512; ++i) CHECK(std::abs(sum[i] - total.grad[i]) < 1e-10);
}

TEST_CASE("each loss gradient matches central finite differences") {
  const auto cfg = fd_config();
  const auto s = wave(random_signal(17, 512));
  auto e = wave(random_signal(18, 512));
  const char* names[4] = {"sc", "logmag", "if", "wphase"};
  const LossWeights parts[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  std::mt19937_64 rng(19);
  for (int term = 0; term < 4; ++term) {
    const auto analytic = total_loss_grad(s, e, cfg, parts[term]);
    double scale = 0.0;
    for (double v : analytic.grad) scale = std::max(scale, std::abs(v));
    int bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t i = rng() % e.size();
      const double fd = specinv::testing::central_difference(
          [&] { return total_loss(s, e, cfg, parts[term]).total; }, e.samples[i], 1e-4);
      const double err = specinv::testing::relative_error(analytic.grad[i], fd, 1e-6 * scale);
      if (err >= 1e-4) {
        ++bad;
        MESSAGE(names[term] << " coordinate " << i << ": analytic " << analytic.grad[i] << " fd " << fd);
      }
    }
    CHECK_MESSAGE(bad == 0, names[term]);
  }
}
