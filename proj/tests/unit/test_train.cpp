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

#include "corpus.hpp"
#include "specinv/error.hpp"
#include "specinv/train.hpp"

using namespace specinv;

namespace {

constexpr double kPi = std::numbers::pi;

StftConfig tiny_stft() {
  StftConfig c;
  c.hop_length = 8;
  c.win_length = 32;
  c.fft_size = 32;
  return c;
}

McnnConfig tiny_config() {
  McnnConfig c;
  c.num_heads = 2;
  c.layers = {{2, 3, 4}, {2, 3, 2}, {2, 3, 1}};
  c.input_channels = tiny_stft().bins();
  return c;
}

// Stationary input gives hop-periodic output, so the mixture uses multiples
// of sample_rate / hop = 2 kHz.
Waveform mixture(double seconds) {
  const std::size_t n = static_cast<std::size_t>(seconds * 16000);
  Waveform w{std::vector<double>(n), 16000};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / 16000.0;
    w.samples[i] = 0.3 * std::sin(2 * kPi * 2000 * t) + 0.2 * std::sin(2 * kPi * 6000 * t + 1.0);
  }
  return w;
}

TrainConfig quick(std::size_t iters) {
  TrainConfig c;
  c.max_iters = iters;
  c.batch_size = 3;
  c.segment_frames = 16;
  c.lr0 = 0.003;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig c;
  CHECK(c.learning_rate(0) == doctest::Approx(0.0005));
  CHECK(c.learning_rate(4999) == doctest::Approx(0.0005));
  CHECK(c.learning_rate(5000) == doctest::Approx(0.00047));
  CHECK(c.learning_rate(10000) == doctest::Approx(0.0004418));
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.decay = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.decay = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.segment_frames = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  auto p = init_params(tiny_config(), 1);
  const auto before = p;
  AdamState st;
  McnnParams zero(tiny_config());
  for (std::size_t it = 0; it < 3; ++it) adam_step(p, zero, st, it, TrainConfig{});
  CHECK(p == before);
}

TEST_CASE("first adam step moves every parameter by about lr against the gradient sign") {
  auto p = init_params(tiny_config(), 2);
  const auto before = p;
  McnnParams g(tiny_config());
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = (i % 3 == 0 ? -1.0 : 0.25) * (1 + i % 5);
  AdamState st;
  TrainConfig c;
  adam_step(p, g, st, 0, c);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double step = p.values()[i] - before.values()[i];
    const double expected = -c.lr0 * (g.values()[i] > 0 ? 1.0 : -1.0);
    CHECK(step == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("corpus validation names the offending clip") {
  const auto stft = tiny_stft();
  std::vector<Waveform> corpus{mixture(0.5), Waveform{std::vector<double>(100, 0.1), 16000}};
  try {
    validate_corpus(corpus, stft, 16);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("clip 1") != std::string::npos);
  }
  corpus[1] = mixture(0.5);
  corpus[1].sample_rate = 8000;
  CHECK_THROWS_AS(validate_corpus(corpus, stft, 16), ValidationError);
  CHECK_THROWS_AS(validate_corpus({}, stft, 16), ValidationError);
}

TEST_CASE("a silent corpus is rejected") {
  std::vector<Waveform> corpus{Waveform{std::vector<double>(4000, 0.0), 16000}};
  CHECK_THROWS_AS(train(corpus, tiny_stft(), tiny_config(), quick(2), {1, 0, 0, 0}, {}), ValidationError);
}

TEST_CASE("training is deterministic and independent of the thread count") {
  const std::vector<Waveform> corpus{mixture(1.0)};
  const auto a = train(corpus, tiny_stft(), tiny_config(), quick(15), {1, 6, 10, 1}, {});
  const auto b = train(corpus, tiny_stft(), tiny_config(), quick(15), {1, 6, 10, 1}, {});
  TrainHooks threaded;
  threaded.threads = 3;
  const auto c = train(corpus, tiny_stft(), tiny_config(), quick(15), {1, 6, 10, 1}, {}, threaded);
  CHECK(a.params == b.params);
  CHECK(metrics_csv(a.log) == metrics_csv(b.log));
  CHECK(a.params == c.params);
  CHECK(metrics_csv(a.log) == metrics_csv(c.log));

  const auto d = train(corpus, tiny_stft(), tiny_config(), quick(15), {1, 0, 0, 0}, {});
  CHECK_FALSE(a.params == d.params);
}

TEST_CASE("metrics csv layout") {
  const std::vector<Waveform> corpus{mixture(1.0)};
  const auto r = train(corpus, tiny_stft(), tiny_config(), quick(3), {1, 6, 10, 1}, {});
  const auto csv = metrics_csv(r.log);
  CHECK(csv.rfind("iter,total,sc,logmag,if,wphase,lr\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  REQUIRE(r.log.size() == 3);
  const auto& m = r.log[1];
  CHECK(m.iter == 1);
  CHECK(m.loss.total == doctest::Approx(m.loss.sc + 6 * m.loss.logmag + 10 * m.loss.instfreq + m.loss.wphase));
}

TEST_CASE("held-out evaluation runs on schedule") {
  const std::vector<Waveform> corpus{mixture(1.0)};
  const auto heldout = mixture(0.5);
  TrainHooks hooks;
  hooks.heldout = &heldout;
  hooks.eval_every = 4;
  std::size_t calls = 0;
  hooks.on_eval = [&](std::size_t, double) { ++calls; };
  const auto r = train(corpus, tiny_stft(), tiny_config(), quick(10), {1, 0, 0, 0}, {}, hooks);
  CHECK(calls == 3);  // 4, 8 and the final iteration
  REQUIRE(r.heldout_sc_db.size() == 3);
  CHECK(r.heldout_sc_db.back().first == 10);
}

TEST_CASE("tiny network learns a two-tone mixture") {
  const std::vector<Waveform> corpus{mixture(2.0)};
  TrainConfig c = quick(2000);
  c.segment_frames = 32;
  c.batch_size = 4;
  const auto r = train(corpus, tiny_stft(), tiny_config(), c, {1, 0, 0, 0}, {});
  const double early = to_db(r.log[10].loss.sc);
  const double late = to_db(r.log.back().loss.sc);
  MESSAGE("training SC " << early << " dB at iteration 10, " << late << " dB at the end");
  CHECK(early - late >= 10.0);
}
