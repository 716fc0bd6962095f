// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TRAIN_TRAINER_HPP_
#define GLOW_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glow/model/params.hpp"
#include "glow/synth/synthgen.hpp"
#include "glow/train/evaluate.hpp"

namespace glow {

enum class TrainStages { kBoth, kCorrespondence, kClassifier };

struct TrainConfig {
  Hyper hyper{5, 64, 4, 10};
  std::uint64_t seed = 1;

  // Data: training pair k is generated from pair_rng(seed, k) with an inlier
  // ratio and noise drawn uniformly from the ranges below.
  std::size_t points = 512;
  std::size_t train_pairs = 20000;
  double inlier_ratio_min = 0.2, inlier_ratio_max = 1.0;
  double noise_min = 0.05, noise_max = 0.6;
  Difficulty difficulty;
  std::size_t held_out_pairs = 100;  // medium preset, evaluated after every epoch

  // Stage 1: assignment loss on every layer's head.
  std::size_t epochs = 1;
  std::size_t batch = 8;
  double learning_rate = 1e-3;
  double final_learning_rate = 1e-5;  // cosine annealing target
  std::size_t warmup_steps = 100;
  // Stage 2: confidence classifiers only, on the first classifier_pairs pairs.
  std::size_t classifier_epochs = 1;
  std::size_t classifier_pairs = 2000;
  double classifier_learning_rate = 1e-3;
  TrainStages stages = TrainStages::kBoth;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 10.0;
  double tau = 0.1;

  std::size_t jobs = 1;
  std::size_t checkpoint_every = 0;  // steps; 0 = end of each epoch only
  std::size_t max_steps = 0;         // stop (with a checkpoint) after this many steps in this call; 0 = no limit

  /// Throws InvalidInput when a value is out of range.
  void validate() const;
};

/// Optimizer and position, stored inside checkpoints.
struct TrainState {
  std::uint32_t stage = 1;  // 1 or 2
  std::uint64_t epoch = 0;
  std::uint64_t step_in_epoch = 0;
  std::uint64_t global_step = 0;  // within the stage
  std::uint64_t adam_step = 0;
  double loss_sum = 0;            // over the current epoch
  std::uint64_t loss_count = 0;
  std::vector<Matrix<double>> first_moment, second_moment;

  std::vector<std::uint8_t> encode() const;
  static TrainState decode(std::span<const std::uint8_t> bytes);
  friend bool operator==(const TrainState&, const TrainState&) = default;
};

struct MetricsRow {
  std::size_t epoch = 0;  // 1-based within the stage
  int stage = 1;
  double loss = 0;
  double precision = 0;
  double recall = 0;
  double mean_exit_layer = 0;
};

std::string metrics_header();
std::string format_metrics(const MetricsRow& row);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainOutputs {
  std::optional<std::filesystem::path> checkpoint;  // written at epoch ends, every checkpoint_every steps and on stop
  std::optional<std::filesystem::path> metrics;     // CSV, appended
};

template <typename T>
struct TrainResult {
  ModelParams<T> params;
  TrainState state;
  std::vector<MetricsRow> metrics;
  bool finished = false;  // false when max_steps stopped the run early
};

/// Loss and gradient of one pair, parameters in serialization order.
template <typename T>
struct PairGradient {
  bool skipped = false;  // no labels
  double loss = 0;
  std::vector<double> layer_loss;
  std::vector<Matrix<T>> grads;
};

template <typename T>
PairGradient<T> correspondence_gradient(const ModelParams<T>& params, const SynthPair& pair);

/// Gradient of the classifier loss; only classifier entries are non-zero.
template <typename T>
PairGradient<T> classifier_gradient(const ModelParams<T>& params, const SynthPair& pair, double tau);

/// Training pair k of the configured stream.
SynthPair training_pair(const TrainConfig& config, std::uint64_t k);
std::vector<SynthPair> held_out_pairs(const TrainConfig& config);

double learning_rate_at(const TrainConfig& config, std::uint64_t step, std::uint64_t total_steps);

/// Runs (or continues, when `resume` is set) the two-stage recipe from
/// `params`. Bit-reproducible for a given config at 64 bits, including
/// across stop/resume.
template <typename T>
TrainResult<T> train(const TrainConfig& config, ModelParams<T> params, std::optional<TrainState> resume = std::nullopt,
                     const TrainOutputs& outputs = {});

}  // namespace glow

#endif  // GLOW_TRAIN_TRAINER_HPP_
