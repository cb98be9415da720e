// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrmt/model.hpp"

namespace lrmt::training {

using model::Gradients;
using model::ModelConfig;
using model::Parameters;
using subword::TokenId;

struct TrainConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t batch_tokens = 4096;
  std::int64_t checkpoint_every = 500;
  int patience = 6;
  std::int64_t max_steps = 100000;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::string canonical() const;
};

struct OptimizerState {
  Parameters m;
  Parameters v;
  std::int64_t t = 0;
};

OptimizerState init_optimizer(const Parameters& params);

// One Adam update with bias correction. Throws kShapeMismatch.
void adam_step(Parameters& params, const Gradients& grads, OptimizerState& state,
               const TrainConfig& config);

double global_norm(const Gradients& grads);
// Rescales in place so the global norm is at most max_norm; returns the norm
// before clipping.
double clip_by_global_norm(Gradients& grads, double max_norm);

struct TokenizedPair {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
};

struct BatchPlan {
  std::vector<std::size_t> indices;  // into the input pairs
  bool flagged = false;              // a lone pair over the token budget
};

// Cost of a batch of pairs: rows x max(longest source, longest target).
std::int64_t batch_cost(const std::vector<TokenizedPair>& pairs,
                        const std::vector<std::size_t>& indices);

std::vector<BatchPlan> make_batches(const std::vector<TokenizedPair>& pairs,
                                    std::int64_t batch_tokens, std::uint64_t seed);

model::Batch build_batch(const std::vector<TokenizedPair>& pairs, const BatchPlan& plan);

// Lower-is-better metric; true once `patience` checkpoints have passed since
// the first occurrence of the minimum.
bool should_stop(const std::vector<double>& metric_history, int patience = 6);

struct Checkpoint {
  Parameters params;
  OptimizerState optimizer;
  std::int64_t step = 0;
  std::vector<std::pair<std::int64_t, double>> history;  // (step, validation metric)
  std::uint64_t fingerprint = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws kVersionMismatch or kCorrupt.
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Additionally throws kFingerprintMismatch when the stored config differs.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);
Checkpoint parse_checkpoint(const std::string& bytes);

// Token-weighted mean loss over `pairs`, dropout off.
double evaluate_loss(const Parameters& params, const std::vector<TokenizedPair>& pairs,
                     std::int64_t batch_tokens);

struct CheckpointRecord {
  std::int64_t step = 0;
  double train_loss = 0.0;
  double valid_metric = 0.0;
  bool best = false;
};

std::string format_log_line(const CheckpointRecord& record);

struct TrainHooks {
  // Replaces the validation-loss evaluator when set.
  std::function<double(const Parameters&, std::int64_t step)> evaluator;
  std::function<void(const CheckpointRecord&, const Parameters&)> on_checkpoint;
  // When set, writes last.ckpt / best.ckpt and appends log lines to train.log.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::optional<Checkpoint> resume;
};

struct TrainResult {
  Checkpoint best;
  Checkpoint last;
  std::vector<CheckpointRecord> records;
  bool early_stopped = false;
};

TrainResult train(const std::vector<TokenizedPair>& train_pairs,
                  const std::vector<TokenizedPair>& valid_pairs, const ModelConfig& model_config,
                  const TrainConfig& train_config, const TrainHooks& hooks = {});

}  // namespace lrmt::training
