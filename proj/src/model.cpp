// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lrmt/config.hpp"
#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"

namespace lrmt::model {
namespace {

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

struct LstmCache {
  MatrixXd x;  // after dropout
  MatrixXd x_mask;
  MatrixXd h_prev, c_prev;
  MatrixXd i, f, g, o;
  MatrixXd c, tanh_c, h;
};

void lstm_forward(const LstmWeights& w, LstmCache& cache) {
  const Eigen::Index h = w.recurrent.cols();
  MatrixXd z = w.input * cache.x + w.recurrent * cache.h_prev;
  z.colwise() += w.bias;
  cache.i = sigmoid(z.topRows(h));
  cache.f = sigmoid(z.middleRows(h, h));
  cache.g = z.middleRows(2 * h, h).array().tanh().matrix();
  cache.o = sigmoid(z.bottomRows(h));
  cache.c = cache.f.cwiseProduct(cache.c_prev) + cache.i.cwiseProduct(cache.g);
  cache.tanh_c = cache.c.array().tanh().matrix();
  cache.h = cache.o.cwiseProduct(cache.tanh_c);
}

// Accumulates weight gradients; writes input/state gradients.
void lstm_backward(const LstmWeights& w, const LstmCache& cache, const MatrixXd& dh,
                   const MatrixXd& dc_in, LstmWeights& grad, MatrixXd& dx, MatrixXd& dh_prev,
                   MatrixXd& dc_prev) {
  const Eigen::Index h = w.recurrent.cols();
  const Eigen::Index cols = dh.cols();
  MatrixXd dc = dc_in + (dh.array() * cache.o.array() * (1.0 - cache.tanh_c.array().square()))
                            .matrix();
  MatrixXd dz(4 * h, cols);
  dz.topRows(h) = (dc.array() * cache.g.array() * cache.i.array() * (1.0 - cache.i.array()))
                      .matrix();
  dz.middleRows(h, h) =
      (dc.array() * cache.c_prev.array() * cache.f.array() * (1.0 - cache.f.array())).matrix();
  dz.middleRows(2 * h, h) =
      (dc.array() * cache.i.array() * (1.0 - cache.g.array().square())).matrix();
  dz.bottomRows(h) = (dh.array() * cache.tanh_c.array() * cache.o.array() *
                      (1.0 - cache.o.array()))
                         .matrix();
  grad.input.noalias() += dz * cache.x.transpose();
  grad.recurrent.noalias() += dz * cache.h_prev.transpose();
  grad.bias += dz.rowwise().sum();
  dx.noalias() = w.input.transpose() * dz;
  dh_prev.noalias() = w.recurrent.transpose() * dz;
  dc_prev = dc.cwiseProduct(cache.f);
}

MatrixXd dropout_mask(Rng& rng, Eigen::Index rows, Eigen::Index cols, double rate) {
  MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      mask(r, c) = rng.uniform01() < rate ? 0.0 : keep_scale;
    }
  }
  return mask;
}

MatrixXd gather_rows(const MatrixXd& table, const Eigen::Matrix<TokenId, Eigen::Dynamic, 1>& ids) {
  MatrixXd out(table.cols(), ids.size());
  for (Eigen::Index b = 0; b < ids.size(); ++b) out.col(b) = table.row(ids[b]).transpose();
  return out;
}

void scatter_rows(MatrixXd& table_grad, const Eigen::Matrix<TokenId, Eigen::Dynamic, 1>& ids,
                  const MatrixXd& d) {
  for (Eigen::Index b = 0; b < ids.size(); ++b) table_grad.row(ids[b]) += d.col(b).transpose();
}

struct DecoderCache {
  LstmCache lstm;
  MatrixXd q;       // h x B
  MatrixXd alpha;   // Ts x B
  MatrixXd joined;  // 2h x B: [context; h]
  MatrixXd attn_hidden;  // tanh output, h x B
  MatrixXd attn_mask;    // dropout on attn_hidden
  MatrixXd d_attn_hidden;
};

// Shared forward (and optional backward) pass over a padded batch.
LossResult run_batch(const Parameters& p, const Batch& batch, bool dropout_on, std::uint64_t seed,
                     Gradients* grads) {
  validate_batch(p, batch);
  const ModelConfig& cfg = p.config;
  const Eigen::Index B = batch.rows();
  const Eigen::Index Ts = batch.src.cols();
  const Eigen::Index Tt = batch.tgt.cols();
  const Eigen::Index h = cfg.hidden;
  const double rate = dropout_on ? cfg.dropout : 0.0;
  const bool general = cfg.attention_score == AttentionScore::kGeneral;
  Rng rng(seed);

  const std::int64_t n_tokens = batch.target_tokens();
  const double scale = n_tokens > 0 ? 1.0 / static_cast<double>(n_tokens) : 0.0;

  // Encoder. `memory[t]` holds states after carrying finished rows forward.
  std::vector<LstmCache> enc(static_cast<std::size_t>(Ts));
  std::vector<MatrixXd> memory(static_cast<std::size_t>(Ts));
  std::vector<Eigen::Array<double, 1, Eigen::Dynamic>> active(static_cast<std::size_t>(Ts));
  MatrixXd h_state = MatrixXd::Zero(h, B);
  MatrixXd c_state = MatrixXd::Zero(h, B);
  for (Eigen::Index t = 0; t < Ts; ++t) {
    auto& cache = enc[static_cast<std::size_t>(t)];
    cache.x = gather_rows(p.src_embed, batch.src.col(t));
    if (rate > 0.0) {
      cache.x_mask = dropout_mask(rng, cache.x.rows(), B, rate);
      cache.x = cache.x.cwiseProduct(cache.x_mask);
    }
    cache.h_prev = h_state;
    cache.c_prev = c_state;
    lstm_forward(p.encoder, cache);
    auto& m = active[static_cast<std::size_t>(t)];
    m.resize(B);
    for (Eigen::Index b = 0; b < B; ++b) {
      m(b) = t < batch.src_len[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
      if (m(b) > 0.0) {
        h_state.col(b) = cache.h.col(b);
        c_state.col(b) = cache.c.col(b);
      }
    }
    memory[static_cast<std::size_t>(t)] = h_state;
  }

  // Decoder with teacher forcing.
  const Eigen::Index steps = Tt - 1;
  std::vector<DecoderCache> dec(static_cast<std::size_t>(steps));
  double total_nll = 0.0;
  for (Eigen::Index j = 0; j < steps; ++j) {
    auto& dc = dec[static_cast<std::size_t>(j)];
    dc.lstm.x = gather_rows(p.tgt_embed, batch.tgt.col(j));
    if (rate > 0.0) {
      dc.lstm.x_mask = dropout_mask(rng, dc.lstm.x.rows(), B, rate);
      dc.lstm.x = dc.lstm.x.cwiseProduct(dc.lstm.x_mask);
    }
    dc.lstm.h_prev = h_state;
    dc.lstm.c_prev = c_state;
    lstm_forward(p.decoder, dc.lstm);
    h_state = dc.lstm.h;
    c_state = dc.lstm.c;

    dc.q = general ? MatrixXd(p.attention.transpose() * dc.lstm.h) : dc.lstm.h;
    dc.alpha = MatrixXd::Zero(Ts, B);
    dc.joined.resize(2 * h, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const int len = batch.src_len[static_cast<std::size_t>(b)];
      double max_score = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < len; ++s) {
        dc.alpha(s, b) = dc.q.col(b).dot(memory[static_cast<std::size_t>(s)].col(b));
        max_score = std::max(max_score, dc.alpha(s, b));
      }
      double z = 0.0;
      for (int s = 0; s < len; ++s) {
        dc.alpha(s, b) = std::exp(dc.alpha(s, b) - max_score);
        z += dc.alpha(s, b);
      }
      VectorXd context = VectorXd::Zero(h);
      for (int s = 0; s < len; ++s) {
        dc.alpha(s, b) /= z;
        context += dc.alpha(s, b) * memory[static_cast<std::size_t>(s)].col(b);
      }
      dc.joined.col(b).head(h) = context;
    }
    dc.joined.bottomRows(h) = dc.lstm.h;
    MatrixXd pre = p.combine * dc.joined;
    pre.colwise() += p.combine_bias;
    dc.attn_hidden = pre.array().tanh().matrix();
    MatrixXd dropped = dc.attn_hidden;
    if (rate > 0.0) {
      dc.attn_mask = dropout_mask(rng, h, B, rate);
      dropped = dropped.cwiseProduct(dc.attn_mask);
    }
    MatrixXd logits = p.output * dropped;
    logits.colwise() += p.output_bias;

    MatrixXd dlogits;
    if (grads) dlogits = MatrixXd::Zero(logits.rows(), B);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (j + 1 >= batch.tgt_len[static_cast<std::size_t>(b)]) continue;
      const TokenId gold = batch.tgt(b, j + 1);
      const double mx = logits.col(b).maxCoeff();
      const double lse = mx + std::log((logits.col(b).array() - mx).exp().sum());
      total_nll += lse - logits(gold, b);
      if (grads) {
        dlogits.col(b) = ((logits.col(b).array() - lse).exp() * scale).matrix();
        dlogits(gold, b) -= scale;
      }
    }
    if (grads) {
      grads->output.noalias() += dlogits * dropped.transpose();
      grads->output_bias += dlogits.rowwise().sum();
      dc.d_attn_hidden.noalias() = p.output.transpose() * dlogits;
      if (rate > 0.0) dc.d_attn_hidden = dc.d_attn_hidden.cwiseProduct(dc.attn_mask);
    }
  }

  LossResult result{n_tokens > 0 ? total_nll * scale : 0.0, n_tokens};
  if (!grads) return result;

  // Backward through the decoder.
  std::vector<MatrixXd> d_memory(static_cast<std::size_t>(Ts), MatrixXd::Zero(h, B));
  MatrixXd dh_next = MatrixXd::Zero(h, B);
  MatrixXd dc_next = MatrixXd::Zero(h, B);
  MatrixXd dx, dh_prev, dc_prev;
  for (Eigen::Index j = steps - 1; j >= 0; --j) {
    auto& dc = dec[static_cast<std::size_t>(j)];
    MatrixXd du = (dc.d_attn_hidden.array() * (1.0 - dc.attn_hidden.array().square())).matrix();
    grads->combine.noalias() += du * dc.joined.transpose();
    grads->combine_bias += du.rowwise().sum();
    MatrixXd d_joined = p.combine.transpose() * du;
    MatrixXd dh = d_joined.bottomRows(h) + dh_next;
    MatrixXd dq = MatrixXd::Zero(h, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const int len = batch.src_len[static_cast<std::size_t>(b)];
      const auto d_context = d_joined.col(b).head(h);
      VectorXd d_alpha(len);
      for (int s = 0; s < len; ++s) {
        d_alpha(s) = d_context.dot(memory[static_cast<std::size_t>(s)].col(b));
        d_memory[static_cast<std::size_t>(s)].col(b) += dc.alpha(s, b) * d_context;
      }
      const double weighted = dc.alpha.col(b).head(len).dot(d_alpha);
      for (int s = 0; s < len; ++s) {
        const double d_score = dc.alpha(s, b) * (d_alpha(s) - weighted);
        dq.col(b) += d_score * memory[static_cast<std::size_t>(s)].col(b);
        d_memory[static_cast<std::size_t>(s)].col(b) += d_score * dc.q.col(b);
      }
    }
    if (general) {
      grads->attention.noalias() += dc.lstm.h * dq.transpose();
      dh.noalias() += p.attention * dq;
    } else {
      dh += dq;
    }
    lstm_backward(p.decoder, dc.lstm, dh, dc_next, grads->decoder, dx, dh_prev, dc_prev);
    if (rate > 0.0) dx = dx.cwiseProduct(dc.lstm.x_mask);
    scatter_rows(grads->tgt_embed, batch.tgt.col(j), dx);
    dh_next = dh_prev;
    dc_next = dc_prev;
  }

  // Backward through the encoder; finished rows pass gradients straight
  // through the carry.
  for (Eigen::Index t = Ts - 1; t >= 0; --t) {
    const auto& cache = enc[static_cast<std::size_t>(t)];
    const auto& m = active[static_cast<std::size_t>(t)];
    MatrixXd dh_t = dh_next + d_memory[static_cast<std::size_t>(t)];
    MatrixXd dh_cell = dh_t.array().rowwise() * m;
    MatrixXd dc_cell = dc_next.array().rowwise() * m;
    lstm_backward(p.encoder, cache, dh_cell, dc_cell, grads->encoder, dx, dh_prev, dc_prev);
    if (rate > 0.0) dx = dx.cwiseProduct(cache.x_mask);
    scatter_rows(grads->src_embed, batch.src.col(t), dx);
    const auto carry = 1.0 - m;
    dh_next = dh_prev + (dh_t.array().rowwise() * carry).matrix();
    dc_next = dc_prev + (dc_next.array().rowwise() * carry).matrix();
  }
  return result;
}

}  // namespace

std::string attention_name(AttentionScore score) {
  return score == AttentionScore::kDot ? "dot" : "general";
}

AttentionScore parse_attention(const std::string& name) {
  if (name == "general") return AttentionScore::kGeneral;
  if (name == "dot") return AttentionScore::kDot;
  throw Error(ErrorCode::kInvalidArgument, "unknown attention score: " + name);
}

void ModelConfig::validate() const {
  if (embed_dim <= 0 || hidden <= 0 || src_vocab_size <= 0 || tgt_vocab_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout must be in [0, 1)");
  }
  if (num_layers != 1) {
    throw Error(ErrorCode::kInvalidArgument, "only single-layer models are supported");
  }
}

std::string ModelConfig::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "embed_dim=" << embed_dim << ";hidden=" << hidden << ";dropout=" << dropout
      << ";num_layers=" << num_layers << ";attention=" << attention_name(attention_score)
      << ";src_vocab=" << src_vocab_size << ";tgt_vocab=" << tgt_vocab_size;
  return out.str();
}

std::uint64_t ModelConfig::fingerprint() const { return fnv1a64(canonical()); }

std::vector<TensorView> tensors(Parameters& p) {
  auto view = [](const std::string& name, auto& t) {
    return TensorView{name, t.data(), t.rows(), t.cols()};
  };
  return {view("src_embed", p.src_embed),
          view("tgt_embed", p.tgt_embed),
          view("encoder.input", p.encoder.input),
          view("encoder.recurrent", p.encoder.recurrent),
          view("encoder.bias", p.encoder.bias),
          view("decoder.input", p.decoder.input),
          view("decoder.recurrent", p.decoder.recurrent),
          view("decoder.bias", p.decoder.bias),
          view("attention", p.attention),
          view("combine", p.combine),
          view("combine_bias", p.combine_bias),
          view("output", p.output),
          view("output_bias", p.output_bias)};
}

std::vector<const double*> tensor_data(const Parameters& p) {
  std::vector<const double*> out;
  for (const auto& t : tensors(const_cast<Parameters&>(p))) out.push_back(t.data);
  return out;
}

Parameters zero_parameters(const ModelConfig& config) {
  config.validate();
  const int e = config.embed_dim, h = config.hidden;
  Parameters p;
  p.config = config;
  p.src_embed = MatrixXd::Zero(config.src_vocab_size, e);
  p.tgt_embed = MatrixXd::Zero(config.tgt_vocab_size, e);
  for (auto* lstm : {&p.encoder, &p.decoder}) {
    lstm->input = MatrixXd::Zero(4 * h, e);
    lstm->recurrent = MatrixXd::Zero(4 * h, h);
    lstm->bias = VectorXd::Zero(4 * h);
  }
  p.attention = MatrixXd::Zero(h, h);
  p.combine = MatrixXd::Zero(h, 2 * h);
  p.combine_bias = VectorXd::Zero(h);
  p.output = MatrixXd::Zero(config.tgt_vocab_size, h);
  p.output_bias = VectorXd::Zero(config.tgt_vocab_size);
  return p;
}

Parameters init_parameters(const ModelConfig& config, std::uint64_t seed, double scale) {
  Parameters p = zero_parameters(config);
  Rng rng(seed);
  for (auto& t : tensors(p)) {
    for (Eigen::Index k = 0; k < t.size(); ++k) t.data[k] = rng.uniform(-scale, scale);
  }
  return p;
}

Gradients zeros_like(const Parameters& params) { return zero_parameters(params.config); }

bool same_shapes(const Parameters& a, const Parameters& b) {
  auto ta = tensors(const_cast<Parameters&>(a));
  auto tb = tensors(const_cast<Parameters&>(b));
  if (ta.size() != tb.size()) return false;
  for (std::size_t k = 0; k < ta.size(); ++k) {
    if (ta[k].rows != tb[k].rows || ta[k].cols != tb[k].cols) return false;
  }
  return true;
}

bool all_finite(const Parameters& params) {
  for (const auto& t : tensors(const_cast<Parameters&>(params))) {
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      if (!std::isfinite(t.data[k])) return false;
    }
  }
  return true;
}

std::size_t parameter_count(const Parameters& params) {
  std::size_t n = 0;
  for (const auto& t : tensors(const_cast<Parameters&>(params))) {
    n += static_cast<std::size_t>(t.size());
  }
  return n;
}

LstmOutput lstm_step(const MatrixXd& input_weights, const MatrixXd& recurrent_weights,
                     const VectorXd& bias, const VectorXd& x, const VectorXd& h_prev,
                     const VectorXd& c_prev) {
  const LstmWeights w{input_weights, recurrent_weights, bias};
  LstmCache cache;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  lstm_forward(w, cache);
  return {cache.h.col(0), cache.c.col(0)};
}

EncoderStates encode_sequence(const Parameters& params, const std::vector<TokenId>& src_ids) {
  if (src_ids.empty()) throw Error(ErrorCode::kEmptySource, "empty source sequence");
  const int h = params.config.hidden;
  EncoderStates out;
  out.states.resize(static_cast<Eigen::Index>(src_ids.size()), h);
  VectorXd hs = VectorXd::Zero(h), cs = VectorXd::Zero(h);
  for (std::size_t t = 0; t < src_ids.size(); ++t) {
    const TokenId id = src_ids[t];
    if (id < 0 || id >= params.config.src_vocab_size) {
      throw Error(ErrorCode::kUnknownId, "source id out of range: " + std::to_string(id));
    }
    auto step = lstm_step(params.encoder.input, params.encoder.recurrent, params.encoder.bias,
                          params.src_embed.row(id).transpose(), hs, cs);
    hs = std::move(step.h);
    cs = std::move(step.c);
    out.states.row(static_cast<Eigen::Index>(t)) = hs.transpose();
  }
  out.final_h = hs;
  out.final_c = cs;
  return out;
}

Attention attend(const VectorXd& h_dec, const EncoderStates& enc, const MatrixXd& score_weights,
                 AttentionScore score) {
  const VectorXd q =
      score == AttentionScore::kGeneral ? VectorXd(score_weights.transpose() * h_dec) : h_dec;
  VectorXd scores = enc.states * q;
  const double mx = scores.maxCoeff();
  VectorXd weights = (scores.array() - mx).exp().matrix();
  weights /= weights.sum();
  return {enc.states.transpose() * weights, weights};
}

StepResult decoder_step(const Parameters& params, const EncoderStates& enc, TokenId prev_token,
                        const DecoderState& state) {
  if (prev_token < 0 || prev_token >= params.config.tgt_vocab_size) {
    throw Error(ErrorCode::kUnknownId, "target id out of range: " + std::to_string(prev_token));
  }
  const int h = params.config.hidden;
  auto next = lstm_step(params.decoder.input, params.decoder.recurrent, params.decoder.bias,
                        params.tgt_embed.row(prev_token).transpose(), state.h, state.c);
  auto att = attend(next.h, enc, params.attention, params.config.attention_score);
  VectorXd joined(2 * h);
  joined << att.context, next.h;
  const VectorXd hidden = (params.combine * joined + params.combine_bias).array().tanh().matrix();
  VectorXd logits = params.output * hidden + params.output_bias;
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return {(logits.array() - lse).matrix(), {std::move(next.h), std::move(next.c)},
          std::move(att.weights)};
}

std::int64_t Batch::target_tokens() const {
  std::int64_t n = 0;
  for (int len : tgt_len) n += std::max(0, len - 1);
  return n;
}

Batch make_batch(const std::vector<std::vector<TokenId>>& sources,
                 const std::vector<std::vector<TokenId>>& targets) {
  if (sources.size() != targets.size() || sources.empty()) {
    throw Error(ErrorCode::kMalformedBatch, "batch needs equal, non-zero source/target rows");
  }
  const auto B = static_cast<Eigen::Index>(sources.size());
  std::size_t ts = 0, tt = 0;
  for (std::size_t b = 0; b < sources.size(); ++b) {
    ts = std::max(ts, sources[b].size());
    tt = std::max(tt, targets[b].size() + 2);
  }
  Batch batch;
  batch.src = decltype(batch.src)::Zero(B, static_cast<Eigen::Index>(ts));
  batch.tgt = decltype(batch.tgt)::Zero(B, static_cast<Eigen::Index>(tt));
  for (std::size_t b = 0; b < sources.size(); ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    for (std::size_t t = 0; t < sources[b].size(); ++t) {
      batch.src(row, static_cast<Eigen::Index>(t)) = sources[b][t];
    }
    batch.tgt(row, 0) = subword::kBosId;
    for (std::size_t t = 0; t < targets[b].size(); ++t) {
      batch.tgt(row, static_cast<Eigen::Index>(t + 1)) = targets[b][t];
    }
    batch.tgt(row, static_cast<Eigen::Index>(targets[b].size() + 1)) = subword::kEosId;
    batch.src_len.push_back(static_cast<int>(sources[b].size()));
    batch.tgt_len.push_back(static_cast<int>(targets[b].size() + 2));
  }
  return batch;
}

void validate_batch(const Parameters& params, const Batch& batch) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kMalformedBatch, why); };
  const auto B = batch.src.rows();
  if (B == 0 || batch.tgt.rows() != B || batch.src_len.size() != static_cast<std::size_t>(B) ||
      batch.tgt_len.size() != static_cast<std::size_t>(B)) {
    fail("row counts disagree");
  }
  for (Eigen::Index b = 0; b < B; ++b) {
    const int sl = batch.src_len[static_cast<std::size_t>(b)];
    const int tl = batch.tgt_len[static_cast<std::size_t>(b)];
    if (sl < 1 || sl > batch.src.cols()) fail("bad source length");
    if (tl < 2 || tl > batch.tgt.cols()) fail("bad target length");
    if (batch.tgt(b, 0) != subword::kBosId || batch.tgt(b, tl - 1) != subword::kEosId) {
      fail("target rows must begin with bos and end with eos");
    }
    for (Eigen::Index t = 0; t < batch.src.cols(); ++t) {
      const TokenId id = batch.src(b, t);
      if (id < 0 || id >= params.config.src_vocab_size) fail("source id out of range");
    }
    for (Eigen::Index t = 0; t < batch.tgt.cols(); ++t) {
      const TokenId id = batch.tgt(b, t);
      if (id < 0 || id >= params.config.tgt_vocab_size) fail("target id out of range");
    }
  }
}

LossResult forward_loss(const Parameters& params, const Batch& batch, bool dropout_on,
                        std::uint64_t seed) {
  return run_batch(params, batch, dropout_on, seed, nullptr);
}

LossAndGradients loss_and_gradients(const Parameters& params, const Batch& batch,
                                    bool dropout_on, std::uint64_t seed) {
  LossAndGradients out{{}, zeros_like(params)};
  out.result = run_batch(params, batch, dropout_on, seed, &out.grads);
  return out;
}

Gradients backward(const Parameters& params, const Batch& batch) {
  return loss_and_gradients(params, batch, false, 0).grads;
}

GradientCheckResult gradient_check(const Parameters& params, const Batch& batch, double epsilon,
                                   std::size_t per_tensor, std::uint64_t seed,
                                   const GradientFn& gradient_fn) {
  Gradients analytic = gradient_fn ? gradient_fn(params, batch) : backward(params, batch);
  Parameters probe = params;
  auto probe_tensors = tensors(probe);
  auto grad_tensors = tensors(analytic);
  Rng rng(seed);
  GradientCheckResult result;
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    auto& t = probe_tensors[k];
    const auto n = static_cast<std::size_t>(t.size());
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    if (n > per_tensor) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(per_tensor);
    }
    for (auto idx : coords) {
      const double saved = t.data[idx];
      t.data[idx] = saved + epsilon;
      const double up = forward_loss(probe, batch).loss;
      t.data[idx] = saved - epsilon;
      const double down = forward_loss(probe, batch).loss;
      t.data[idx] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double exact = grad_tensors[k].data[idx];
      const double denom = std::max({std::abs(numeric), std::abs(exact), kGradCheckFloor});
      double rel = std::abs(numeric - exact) / denom;
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      if (rel > result.max_relative_error || result.worst_tensor.empty()) {
        result.max_relative_error = std::max(rel, result.max_relative_error);
        result.worst_tensor = t.name;
      }
      ++result.coordinates_checked;
    }
  }
  return result;
}

}  // namespace lrmt::model

namespace lrmt::model {

ModelConfig parse_model_config(const std::string& canonical) {
  std::map<std::string, std::string> fields;
  std::istringstream in(canonical);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kCorrupt, "bad config field: " + item);
    fields[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto need = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorCode::kCorrupt, "config missing " + key);
    return it->second;
  };
  ModelConfig c;
  try {
    c.embed_dim = std::stoi(need("embed_dim"));
    c.hidden = std::stoi(need("hidden"));
    c.dropout = std::stod(need("dropout"));
    c.num_layers = std::stoi(need("num_layers"));
    c.attention_score = parse_attention(need("attention"));
    c.src_vocab_size = std::stoi(need("src_vocab"));
    c.tgt_vocab_size = std::stoi(need("tgt_vocab"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kCorrupt, std::string("bad config value: ") + e.what());
  }
  return c;
}

}  // namespace lrmt::model
