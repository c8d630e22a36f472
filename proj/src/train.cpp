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

#include "specinv/train.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "specinv/error.hpp"

namespace specinv {

namespace {

constexpr int kMaxSegmentDraws = 100;

struct ItemResult {
  LossBreakdown loss;
  McnnParams grads;
};

ItemResult item_gradient(const McnnParams& params, const Waveform& target, const StftConfig& stft,
                         const LossWeights& weights, const LossConfig& loss_config) {
  const MagSpectrogram input = magnitude(specinv::stft(target, stft));
  const ForwardCache cache = mcnn_forward_cached(params, input);
  const Waveform estimate{cache.output, target.sample_rate};
  LossGradient lg = total_loss_grad(target, estimate, stft, weights, loss_config);
  return {lg.loss, mcnn_backward(params, cache, lg.grad)};
}

bool is_silent(std::span<const double> x) {
  for (double v : x) {
    if (v != 0.0) return false;
  }
  return true;
}

}  // namespace

double TrainConfig::learning_rate(std::size_t iter) const {
  return lr0 * std::pow(decay, static_cast<double>(iter / decay_every));
}

void TrainConfig::validate() const {
  if (!(decay > 0.0 && decay <= 1.0)) throw ValidationError("decay must lie in (0, 1]");
  if (decay_every == 0) throw ValidationError("decay_every must be positive");
  if (segment_frames < 2) throw ValidationError("segment_frames must be at least 2");
  if (batch_size == 0) throw ValidationError("batch_size must be at least 1");
  if (!(lr0 > 0.0)) throw ValidationError("lr0 must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps_adam > 0.0)) {
    throw ValidationError("invalid Adam hyperparameters");
  }
}

void adam_step(McnnParams& params, const McnnParams& grads, AdamState& state, std::size_t iter,
               const TrainConfig& config) {
  auto p = params.values();
  const auto g = grads.values();
  if (g.size() != p.size()) throw ValidationError("gradient and parameter sizes differ");
  if (state.m.size() != p.size()) {
    state.m.assign(p.size(), 0.0);
    state.v.assign(p.size(), 0.0);
  }
  const double lr = config.learning_rate(iter);
  const double step = static_cast<double>(iter + 1);
  const double c1 = 1.0 - std::pow(config.beta1, step);
  const double c2 = 1.0 - std::pow(config.beta2, step);
  for (std::size_t i = 0; i < p.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps_adam);
  }
}

void validate_corpus(const std::vector<Waveform>& corpus, const StftConfig& stft,
                     std::size_t segment_frames) {
  if (corpus.empty()) throw ValidationError("training corpus is empty");
  const std::size_t need = segment_frames * stft.hop_length;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].sample_rate != stft.sample_rate) {
      throw ValidationError("clip " + std::to_string(i) + " has sample rate " +
                            std::to_string(corpus[i].sample_rate) + ", expected " +
                            std::to_string(stft.sample_rate));
    }
    if (corpus[i].size() < need) {
      throw ValidationError("clip " + std::to_string(i) + " has " +
                            std::to_string(corpus[i].size()) + " samples; training segments need " +
                            std::to_string(need));
    }
  }
}

double reconstruction_sc(const McnnParams& params, const Waveform& clip, const StftConfig& stft) {
  const std::size_t frames = stft.frames_for(clip.size());
  Waveform ref{std::vector<double>(clip.samples.begin(),
                                   clip.samples.begin() + static_cast<std::ptrdiff_t>(frames * stft.hop_length)),
               clip.sample_rate};
  const Waveform est = mcnn_forward(params, magnitude(specinv::stft(ref, stft)));
  return spectral_convergence(ref, est, stft);
}

TrainResult train(const std::vector<Waveform>& corpus, const StftConfig& stft,
                  const McnnConfig& mcnn, const TrainConfig& config, const LossWeights& weights,
                  const LossConfig& loss_config, const TrainHooks& hooks) {
  mcnn.validate_for(stft);
  return train_from(init_params(mcnn, config.seed), corpus, stft, config, weights, loss_config,
                    hooks);
}

TrainResult train_from(McnnParams initial, const std::vector<Waveform>& corpus,
                       const StftConfig& stft, const TrainConfig& config,
                       const LossWeights& weights, const LossConfig& loss_config,
                       const TrainHooks& hooks) {
  config.validate();
  weights.validate();
  loss_config.validate();
  initial.config().validate_for(stft);
  validate_corpus(corpus, stft, config.segment_frames);

  TrainResult result;
  result.params = std::move(initial);
  McnnParams& params = result.params;
  AdamState adam;

  // Segment sampling uses its own stream so the draw sequence depends only on
  // the seed.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t seg_len = config.segment_frames * stft.hop_length;
  const std::size_t batch = config.batch_size;
  const std::size_t threads = std::max<std::size_t>(1, std::min(hooks.threads, batch));

  std::vector<Waveform> targets(batch);
  std::vector<ItemResult> items(batch);

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (int attempt = 0;; ++attempt) {
        std::uniform_int_distribution<std::size_t> pick_clip(0, corpus.size() - 1);
        const Waveform& clip = corpus[pick_clip(rng)];
        std::uniform_int_distribution<std::size_t> pick_off(0, clip.size() - seg_len);
        const std::size_t off = pick_off(rng);
        const auto first = clip.samples.begin() + static_cast<std::ptrdiff_t>(off);
        targets[b] = Waveform{std::vector<double>(first, first + static_cast<std::ptrdiff_t>(seg_len)),
                              clip.sample_rate};
        if (!is_silent(targets[b].samples)) break;
        if (attempt + 1 >= kMaxSegmentDraws) {
          throw ValidationError("corpus yields only silent training segments");
        }
      }
    }

    if (threads == 1) {
      for (std::size_t b = 0; b < batch; ++b) {
        items[b] = item_gradient(params, targets[b], stft, weights, loss_config);
      }
    } else {
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t b = w; b < batch; b += threads) {
              items[b] = item_gradient(params, targets[b], stft, weights, loss_config);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    // Serial reduction in batch order.
    McnnParams grads(params.config());
    IterationMetrics m;
    m.iter = iter;
    m.lr = config.learning_rate(iter);
    const double inv_b = 1.0 / static_cast<double>(batch);
    auto gsum = grads.values();
    for (std::size_t b = 0; b < batch; ++b) {
      const auto g = items[b].grads.values();
      for (std::size_t i = 0; i < gsum.size(); ++i) gsum[i] += g[i];
      m.loss.sc += items[b].loss.sc;
      m.loss.logmag += items[b].loss.logmag;
      m.loss.instfreq += items[b].loss.instfreq;
      m.loss.wphase += items[b].loss.wphase;
      m.loss.total += items[b].loss.total;
    }
    for (double& v : gsum) {
      v *= inv_b;
      if (!std::isfinite(v)) throw NumericError("non-finite gradient at iteration " + std::to_string(iter));
    }
    m.loss.sc *= inv_b;
    m.loss.logmag *= inv_b;
    m.loss.instfreq *= inv_b;
    m.loss.wphase *= inv_b;
    m.loss.total *= inv_b;

    adam_step(params, grads, adam, iter, config);
    result.log.push_back(m);
    if (hooks.on_iteration) hooks.on_iteration(m);

    const bool last = iter + 1 == config.max_iters;
    if (hooks.heldout && hooks.eval_every > 0 && ((iter + 1) % hooks.eval_every == 0 || last)) {
      const double db = to_db(reconstruction_sc(params, *hooks.heldout, stft));
      result.heldout_sc_db.emplace_back(iter + 1, db);
      if (hooks.on_eval) hooks.on_eval(iter + 1, db);
    }
  }
  return result;
}

std::string metrics_csv(const std::vector<IterationMetrics>& log) {
  std::string out = "iter,total,sc,logmag,if,wphase,lr\n";
  char line[256];
  for (const auto& m : log) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.iter,
                  m.loss.total, m.loss.sc, m.loss.logmag, m.loss.instfreq, m.loss.wphase, m.lr);
    out += line;
  }
  return out;
}

}  // namespace specinv
