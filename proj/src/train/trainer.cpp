// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "glow/io/binary.hpp"
#include "glow/num/flops.hpp"
#include "glow/num/parallel.hpp"
#include "glow/train/loss.hpp"

namespace glow {
namespace {

constexpr char kStateMagic[] = "GLTS";
constexpr std::uint32_t kStateVersion = 1;
constexpr std::uint64_t kHeldOutStream = std::uint64_t(1) << 40;
constexpr std::uint64_t kOrderStream = std::uint64_t(1) << 41;

void check(bool ok, const char* message) {
  if (!ok) throw InvalidInput(message);
}

bool is_classifier(const std::string& name) { return name.rfind("classifier", 0) == 0; }

template <typename T>
std::vector<bool> trainable_mask(const ModelParams<T>& params, int stage) {
  std::vector<bool> mask;
  for (const std::string& name : params.names()) mask.push_back(is_classifier(name) == (stage == 2));
  return mask;
}

template <typename T>
void reset_moments(TrainState& state, const ModelParams<T>& params) {
  state.first_moment.clear();
  state.second_moment.clear();
  for (const Matrix<T>* p : params.flat()) {
    state.first_moment.emplace_back(p->rows(), p->cols());
    state.second_moment.emplace_back(p->rows(), p->cols());
  }
  state.adam_step = 0;
}

std::vector<std::uint64_t> epoch_order(std::uint64_t seed, int stage, std::uint64_t epoch, std::size_t count) {
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  auto rng = pair_rng(seed, kOrderStream + std::uint64_t(stage) * (std::uint64_t(1) << 32) + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

template <typename T>
void write_checkpoint(const ModelParams<T>& params, const TrainState& state, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = state.encode();
  save_weights(params, path, std::uint32_t(sizeof(T)), bytes);
}

void append_metrics(const std::filesystem::path& path, const MetricsRow& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open metrics log " + path.string());
  if (fresh) out << metrics_header();
  out << format_metrics(row);
  if (!out) throw std::runtime_error("cannot write metrics log " + path.string());
}

}  // namespace

void TrainConfig::validate() const {
  hyper.validate();
  check(hyper.layers >= 2, "train: at least two layers are needed for the classifiers");
  check(points >= 8, "train: points must be at least 8");
  check(inlier_ratio_min > 0 && inlier_ratio_min <= inlier_ratio_max && inlier_ratio_max <= 1,
        "train: inlier ratio range must lie in (0, 1]");
  check(noise_min >= 0 && noise_min <= noise_max, "train: bad noise range");
  difficulty.validate();
  check(batch > 0, "train: batch must be positive");
  check(learning_rate > 0 && final_learning_rate >= 0 && final_learning_rate <= learning_rate,
        "train: bad learning rates");
  check(classifier_learning_rate > 0, "train: classifier learning rate must be positive");
  check(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_epsilon > 0,
        "train: bad optimizer constants");
  check(clip_norm > 0, "train: clip norm must be positive");
  check(tau > 0 && tau < 1, "train: tau must be in (0, 1)");
  check(jobs > 0, "train: jobs must be positive");
  check(classifier_pairs <= train_pairs || classifier_epochs == 0,
        "train: classifier pairs cannot exceed training pairs");
}

std::vector<std::uint8_t> TrainState::encode() const {
  ByteWriter w;
  w.bytes(std::string_view(kStateMagic, 4));
  w.u32(kStateVersion);
  w.u32(stage);
  w.u64(epoch);
  w.u64(step_in_epoch);
  w.u64(global_step);
  w.u64(adam_step);
  w.f64(loss_sum);
  w.u64(loss_count);
  w.u64(first_moment.size());
  for (const auto* moments : {&first_moment, &second_moment})
    for (const Matrix<double>& m : *moments) {
      w.u64(m.rows());
      w.u64(m.cols());
      for (double v : m.values()) w.f64(v);
    }
  return w.take();
}

TrainState TrainState::decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != std::string_view(kStateMagic, 4)) throw InvalidInput("training state: bad magic");
  if (r.u32() != kStateVersion) throw InvalidInput("training state: unsupported version");
  TrainState s;
  s.stage = r.u32();
  if (s.stage != 1 && s.stage != 2) throw InvalidInput("training state: bad stage");
  s.epoch = r.u64();
  s.step_in_epoch = r.u64();
  s.global_step = r.u64();
  s.adam_step = r.u64();
  s.loss_sum = r.f64();
  s.loss_count = r.u64();
  const std::uint64_t count = r.u64();
  if (count > r.remaining()) throw InvalidInput("training state: bad moment count");
  for (auto* moments : {&s.first_moment, &s.second_moment})
    for (std::uint64_t k = 0; k < count; ++k) {
      const std::uint64_t rows = r.u64(), cols = r.u64();
      if (cols != 0 && rows > r.remaining() / 8 / cols) throw InvalidInput("training state: truncated");
      Matrix<double> m(rows, cols);
      for (double& v : m.values()) v = r.f64();
      moments->push_back(std::move(m));
    }
  if (r.remaining() != 0) throw InvalidInput("training state: trailing bytes");
  return s;
}

std::string metrics_header() { return "epoch,stage,loss,precision,recall,mean_exit_layer\n"; }

std::string format_metrics(const MetricsRow& row) {
  return fmt::format("{},{},{:.9g},{:.6f},{:.6f},{:.4f}\n", row.epoch, row.stage, row.loss, row.precision, row.recall,
                     row.mean_exit_layer);
}

template <typename T>
PairGradient<T> correspondence_gradient(const ModelParams<T>& params, const SynthPair& pair) {
  Tape<T> tape;
  const BoundModel<T> model = bind(params, &tape);
  const DeepPass<T> pass = deep_forward(pair.a, pair.b, model);
  const RowLabels labels = to_rows(pair.gt, pass.pair.a.index, pass.pair.b.index);
  const auto loss = assignment_loss<T>(pass.heads, labels);
  PairGradient<T> out;
  if (!loss) {
    out.skipped = true;
    return out;
  }
  tape.backward(loss->total);
  out.loss = double(loss->total.value()(0, 0));
  out.layer_loss = loss->per_layer;
  out.grads = gradients(model, tape);
  return out;
}

template <typename T>
PairGradient<T> classifier_gradient(const ModelParams<T>& params, const SynthPair& pair, double tau) {
  Tape<T> tape;
  BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));
  // Only the classifiers are tape leaves; everything else is a constant.
  for (std::size_t l = 0; l < model.weights.classifiers.size(); ++l) {
    model.weights.classifiers[l].weight = tape.leaf(params.weights.classifiers[l].weight);
    model.weights.classifiers[l].bias = tape.leaf(params.weights.classifiers[l].bias);
  }
  const DeepPass<T> pass = deep_forward(pair.a, pair.b, model);
  const Var<T> loss =
      classifier_loss<T>(pass, std::span<const Linear<Var<T>>>(model.weights.classifiers), tau);
  PairGradient<T> out;
  if (pair.a.size() + pair.b.size() == 0) {
    out.skipped = true;
    return out;
  }
  tape.backward(loss);
  out.loss = double(loss.value()(0, 0));
  out.grads = gradients(model, tape);
  return out;
}

SynthPair training_pair(const TrainConfig& config, std::uint64_t k) {
  auto rng = pair_rng(config.seed, k);
  PairSpec spec;
  spec.points = config.points;
  spec.descriptor_dim = config.hyper.input_dim;
  spec.difficulty = config.difficulty;
  spec.inlier_ratio = config.inlier_ratio_min == config.inlier_ratio_max
                          ? config.inlier_ratio_min
                          : std::uniform_real_distribution<double>(config.inlier_ratio_min, config.inlier_ratio_max)(rng);
  spec.noise = config.noise_min == config.noise_max
                   ? config.noise_min
                   : std::uniform_real_distribution<double>(config.noise_min, config.noise_max)(rng);
  return generate_pair(rng, spec);
}

std::vector<SynthPair> held_out_pairs(const TrainConfig& config) {
  PairSpec spec = preset_spec(Preset::kMedium, config.points, config.hyper.input_dim);
  spec.difficulty = config.difficulty;
  return make_pairs(spec, config.seed, config.held_out_pairs, kHeldOutStream);
}

double learning_rate_at(const TrainConfig& config, std::uint64_t step, std::uint64_t total_steps) {
  if (config.warmup_steps > 0 && step < config.warmup_steps)
    return config.learning_rate * double(step + 1) / double(config.warmup_steps);
  const std::uint64_t span = total_steps > config.warmup_steps ? total_steps - config.warmup_steps : 1;
  const double progress = std::min(1.0, double(step - std::min<std::uint64_t>(step, config.warmup_steps)) / double(span));
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return config.final_learning_rate + (config.learning_rate - config.final_learning_rate) * cosine;
}

template <typename T>
TrainResult<T> train(const TrainConfig& config, ModelParams<T> params, std::optional<TrainState> resume,
                     const TrainOutputs& outputs) {
  config.validate();
  if (!(params.hyper == config.hyper)) throw InvalidInput("train: model dimensions differ from the configuration");
  TrainResult<T> result;
  const bool run_stage1 = config.stages != TrainStages::kClassifier;
  const bool run_stage2 = config.stages != TrainStages::kCorrespondence;

  TrainState state;
  if (resume) {
    state = std::move(*resume);
    if (state.first_moment.size() != params.flat().size())
      throw InvalidInput("train: checkpoint optimizer state does not match the model");
  } else {
    state.stage = run_stage1 ? 1 : 2;
    reset_moments(state, params);
  }

  const std::vector<SynthPair> held_out = held_out_pairs(config);
  AdaptiveConfig eval_config;
  eval_config.tau = config.tau;
  std::size_t steps_this_call = 0;

  auto save = [&](const std::filesystem::path& path) { write_checkpoint(params, state, path); };

  auto run_stage = [&](int stage) -> bool {
    const std::size_t pairs = stage == 1 ? config.train_pairs : config.classifier_pairs;
    const std::size_t epochs = stage == 1 ? config.epochs : config.classifier_epochs;
    const std::size_t steps_per_epoch = (pairs + config.batch - 1) / config.batch;
    const std::uint64_t total_steps = std::uint64_t(steps_per_epoch) * epochs;
    const std::vector<bool> mask = trainable_mask(params, stage);
    std::vector<Matrix<T>*> flat = params.flat();

    while (state.epoch < epochs && steps_per_epoch > 0) {
      const std::vector<std::uint64_t> order = epoch_order(config.seed, stage, state.epoch, pairs);
      while (state.step_in_epoch < steps_per_epoch) {
        if (config.max_steps > 0 && steps_this_call >= config.max_steps) return false;
        const auto started = std::chrono::steady_clock::now();
        const std::size_t begin = state.step_in_epoch * config.batch;
        const std::size_t end = std::min(pairs, begin + config.batch);
        std::vector<PairGradient<T>> results(end - begin);
        parallel_for(end - begin, config.jobs, [&](std::size_t k) {
          FlopScope off(nullptr);
          const SynthPair pair = training_pair(config, order[begin + k]);
          results[k] = stage == 1 ? correspondence_gradient(params, pair)
                                  : classifier_gradient(params, pair, config.tau);
        });

        // Deterministic reduction in batch order.
        std::vector<Matrix<double>> grad;
        for (const Matrix<T>* p : flat) grad.emplace_back(p->rows(), p->cols());
        std::size_t used = 0;
        double loss = 0;
        for (const PairGradient<T>& r : results) {
          if (r.skipped) continue;
          ++used;
          loss += r.loss;
          for (std::size_t i = 0; i < flat.size(); ++i) {
            if (!mask[i]) continue;
            const T* g = r.grads[i].data();
            double* acc = grad[i].data();
            for (std::size_t e = 0; e < grad[i].size(); ++e) acc[e] += double(g[e]);
          }
        }
        double norm2 = 0;
        if (used > 0) {
          loss /= double(used);
          for (std::size_t i = 0; i < flat.size(); ++i) {
            if (!mask[i]) continue;
            for (double& g : grad[i].values()) {
              g /= double(used);
              norm2 += g * g;
            }
          }
        }
        const double norm = std::sqrt(norm2);
        if (!std::isfinite(loss) || !std::isfinite(norm)) {
          std::filesystem::path diag = outputs.checkpoint ? outputs.checkpoint->string() + ".diverged" : "diverged.glwt";
          save(diag);
          throw TrainingDiverged(fmt::format("training diverged at stage {} epoch {} step {} (loss {}, gradient norm {}); "
                                             "state saved to {}",
                                             stage, state.epoch + 1, state.step_in_epoch, loss, norm, diag.string()));
        }

        if (used > 0) {
          const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
          const double lr = stage == 1 ? learning_rate_at(config, state.global_step, total_steps)
                                       : config.classifier_learning_rate;
          ++state.adam_step;
          const double c1 = 1.0 - std::pow(config.adam_beta1, double(state.adam_step));
          const double c2 = 1.0 - std::pow(config.adam_beta2, double(state.adam_step));
          for (std::size_t i = 0; i < flat.size(); ++i) {
            if (!mask[i]) continue;
            T* p = flat[i]->data();
            double* m = state.first_moment[i].data();
            double* v = state.second_moment[i].data();
            const double* g = grad[i].data();
            for (std::size_t e = 0; e < grad[i].size(); ++e) {
              const double ge = g[e] * clip;
              m[e] = config.adam_beta1 * m[e] + (1.0 - config.adam_beta1) * ge;
              v[e] = config.adam_beta2 * v[e] + (1.0 - config.adam_beta2) * ge * ge;
              const double step = lr * (m[e] / c1) / (std::sqrt(v[e] / c2) + config.adam_epsilon);
              p[e] = T(double(p[e]) - step);
            }
          }
          state.loss_sum += loss;
          ++state.loss_count;
        }
        ++state.step_in_epoch;
        ++state.global_step;
        ++steps_this_call;
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        spdlog::info("stage {} epoch {} step {}/{}: loss {:.5f} |g| {:.3f} ({:.2f}s)", stage, state.epoch + 1,
                     state.step_in_epoch, steps_per_epoch, loss, norm, seconds);
        if (outputs.checkpoint && config.checkpoint_every > 0 && state.global_step % config.checkpoint_every == 0 &&
            state.step_in_epoch < steps_per_epoch)
          save(*outputs.checkpoint);
      }

      // End of epoch: held-out metrics.
      const HeldOutReport report = evaluate_held_out(params, held_out, eval_config, config.jobs);
      MetricsRow row;
      row.epoch = state.epoch + 1;
      row.stage = stage;
      row.loss = state.loss_count ? state.loss_sum / double(state.loss_count) : 0.0;
      row.precision = report.model.precision;
      row.recall = report.model.recall;
      row.mean_exit_layer = report.mean_exit_layer();
      spdlog::info("stage {} epoch {} done: loss {:.5f} held-out precision {:.4f} recall {:.4f} "
                   "(nearest neighbour {:.4f}/{:.4f}) mean exit layer {:.3f}",
                   stage, row.epoch, row.loss, row.precision, row.recall, report.baseline.precision,
                   report.baseline.recall, row.mean_exit_layer);
      result.metrics.push_back(row);
      if (outputs.metrics) append_metrics(*outputs.metrics, row);
      ++state.epoch;
      state.step_in_epoch = 0;
      state.loss_sum = 0;
      state.loss_count = 0;
      if (outputs.checkpoint) save(*outputs.checkpoint);
    }
    return true;
  };

  bool finished = true;
  if (state.stage == 1) {
    if (run_stage1) finished = run_stage(1);
    if (finished && run_stage2) {
      state = TrainState{};
      state.stage = 2;
      reset_moments(state, params);
    }
  }
  if (finished && state.stage == 2 && run_stage2) finished = run_stage(2);
  if (!finished && outputs.checkpoint) save(*outputs.checkpoint);
  result.finished = finished;
  result.state = state;
  result.params = std::move(params);
  return result;
}

#define GLOW_INSTANTIATE(T)                                                                         \
  template PairGradient<T> correspondence_gradient(const ModelParams<T>&, const SynthPair&);        \
  template PairGradient<T> classifier_gradient(const ModelParams<T>&, const SynthPair&, double);    \
  template TrainResult<T> train(const TrainConfig&, ModelParams<T>, std::optional<TrainState>,      \
                                const TrainOutputs&);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow
