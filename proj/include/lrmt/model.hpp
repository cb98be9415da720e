// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lrmt/subword.hpp"

namespace lrmt::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using subword::TokenId;

enum class AttentionScore { kGeneral, kDot };

struct ModelConfig {
  int embed_dim = 128;
  int hidden = 300;
  double dropout = 0.1;
  int num_layers = 1;
  AttentionScore attention_score = AttentionScore::kGeneral;
  int src_vocab_size = 0;
  int tgt_vocab_size = 0;

  void validate() const;
  // Canonical text form; identical configs give identical strings.
  std::string canonical() const;
  std::uint64_t fingerprint() const;
  bool operator==(const ModelConfig&) const = default;
};

std::string attention_name(AttentionScore score);
AttentionScore parse_attention(const std::string& name);

// Gate order in the stacked 4h rows: input, forget, cell candidate, output.
struct LstmWeights {
  MatrixXd input;      // 4h x e
  MatrixXd recurrent;  // 4h x h
  VectorXd bias;       // 4h
};

struct Parameters {
  ModelConfig config;
  MatrixXd src_embed;  // |Vs| x e
  MatrixXd tgt_embed;  // |Vt| x e
  LstmWeights encoder;
  LstmWeights decoder;
  MatrixXd attention;     // h x h
  MatrixXd combine;       // h x 2h, applied to [context; decoder state]
  VectorXd combine_bias;  // h
  MatrixXd output;        // |Vt| x h
  VectorXd output_bias;   // |Vt|
};

// Same layout as Parameters.
using Gradients = Parameters;

// Mutable view of one tensor's contiguous column-major storage.
struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

std::vector<TensorView> tensors(Parameters& params);
std::vector<const double*> tensor_data(const Parameters& params);

// Parameters of the given config with every entry zero.
Parameters zero_parameters(const ModelConfig& config);
// Every entry uniform in (-scale, scale) from the seeded generator.
Parameters init_parameters(const ModelConfig& config, std::uint64_t seed, double scale = 0.1);
Gradients zeros_like(const Parameters& params);
bool same_shapes(const Parameters& a, const Parameters& b);
bool all_finite(const Parameters& params);
std::size_t parameter_count(const Parameters& params);

struct LstmOutput {
  VectorXd h;
  VectorXd c;
};

LstmOutput lstm_step(const MatrixXd& input_weights, const MatrixXd& recurrent_weights,
                     const VectorXd& bias, const VectorXd& x, const VectorXd& h_prev,
                     const VectorXd& c_prev);

struct EncoderStates {
  MatrixXd states;  // T x h
  VectorXd final_h;
  VectorXd final_c;
};

EncoderStates encode_sequence(const Parameters& params, const std::vector<TokenId>& src_ids);

struct Attention {
  VectorXd context;
  VectorXd weights;  // T
};

// Global attention; `score_weights` is ignored for the dot score.
Attention attend(const VectorXd& h_dec, const EncoderStates& enc, const MatrixXd& score_weights,
                 AttentionScore score = AttentionScore::kGeneral);

struct DecoderState {
  VectorXd h;
  VectorXd c;
};

struct StepResult {
  VectorXd log_probs;  // |Vt|
  DecoderState state;
  VectorXd attention_weights;
};

// One decoder step: consumes the previous token, returns next-token
// log-probabilities. Dropout is off.
StepResult decoder_step(const Parameters& params, const EncoderStates& enc, TokenId prev_token,
                        const DecoderState& state);

// Padded batch. Target rows are bos ... eos; pad id is 0 everywhere.
struct Batch {
  Eigen::Matrix<TokenId, Eigen::Dynamic, Eigen::Dynamic> src;  // B x Ts
  Eigen::Matrix<TokenId, Eigen::Dynamic, Eigen::Dynamic> tgt;  // B x Tt
  std::vector<int> src_len;
  std::vector<int> tgt_len;  // includes bos and eos

  int rows() const { return static_cast<int>(src.rows()); }
  // Number of predicted (unmasked) target tokens.
  std::int64_t target_tokens() const;
};

// Builds a batch from unbracketed id sequences; adds bos/eos to targets.
Batch make_batch(const std::vector<std::vector<TokenId>>& sources,
                 const std::vector<std::vector<TokenId>>& targets);

// Throws kMalformedBatch when shapes, lengths, bos/eos framing, or ids are
// inconsistent with the parameters.
void validate_batch(const Parameters& params, const Batch& batch);

struct LossResult {
  double loss = 0.0;  // mean negative log-likelihood per target token
  std::int64_t tokens = 0;
};

LossResult forward_loss(const Parameters& params, const Batch& batch, bool dropout_on = false,
                        std::uint64_t seed = 0);

struct LossAndGradients {
  LossResult result;
  Gradients grads;
};

LossAndGradients loss_and_gradients(const Parameters& params, const Batch& batch,
                                    bool dropout_on = false, std::uint64_t seed = 0);

// Gradient of the mean loss with dropout off.
Gradients backward(const Parameters& params, const Batch& batch);

// Denominator floor for relative errors of near-zero gradient entries.
inline constexpr double kGradCheckFloor = 1e-6;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t coordinates_checked = 0;
};

using GradientFn = std::function<Gradients(const Parameters&, const Batch&)>;

// Central differences on up to `per_tensor` random coordinates of every
// tensor (all of them when the tensor is smaller), against `gradient_fn`
// (the analytic backward by default).
GradientCheckResult gradient_check(const Parameters& params, const Batch& batch,
                                   double epsilon = 1e-5, std::size_t per_tensor = 200,
                                   std::uint64_t seed = 0, const GradientFn& gradient_fn = {});

}  // namespace lrmt::model

namespace lrmt::model {

// Inverse of ModelConfig::canonical(). Throws kCorrupt on malformed input.
ModelConfig parse_model_config(const std::string& canonical);

}  // namespace lrmt::model
