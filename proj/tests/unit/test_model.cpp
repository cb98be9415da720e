#include <doctest.h>

#include <cmath>

#include "lrmt/error.hpp"
#include "lrmt/model.hpp"
#include "lrmt/rng.hpp"

using namespace lrmt;
using namespace lrmt::model;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ModelConfig tiny_config(int vocab = 7, int e = 4, int h = 3,
                        AttentionScore score = AttentionScore::kGeneral) {
  ModelConfig c;
  c.embed_dim = e;
  c.hidden = h;
  c.dropout = 0.0;
  c.attention_score = score;
  c.src_vocab_size = vocab;
  c.tgt_vocab_size = vocab;
  return c;
}

Batch random_batch(Rng& rng, int rows, int vocab, int max_len) {
  std::vector<std::vector<TokenId>> src, tgt;
  for (int r = 0; r < rows; ++r) {
    std::vector<TokenId> s, t;
    const int ls = 1 + static_cast<int>(rng.uniform_index(max_len));
    const int lt = 1 + static_cast<int>(rng.uniform_index(max_len));
    for (int i = 0; i < ls; ++i) s.push_back(4 + static_cast<TokenId>(rng.uniform_index(vocab - 4)));
    for (int i = 0; i < lt; ++i) t.push_back(4 + static_cast<TokenId>(rng.uniform_index(vocab - 4)));
    src.push_back(s);
    tgt.push_back(t);
  }
  return make_batch(src, tgt);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-loop LSTM step, gate rows ordered input, forget, candidate, output.
void reference_lstm(const MatrixXd& W, const MatrixXd& U, const VectorXd& b, const VectorXd& x,
                    const VectorXd& h_prev, const VectorXd& c_prev, VectorXd& h, VectorXd& c) {
  const int n = static_cast<int>(h_prev.size());
  h.resize(n);
  c.resize(n);
  for (int j = 0; j < n; ++j) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      const int row = g * n + j;
      double acc = b(row);
      for (int k = 0; k < x.size(); ++k) acc += W(row, k) * x(k);
      for (int k = 0; k < n; ++k) acc += U(row, k) * h_prev(k);
      z[g] = acc;
    }
    c(j) = sigmoid(z[1]) * c_prev(j) + sigmoid(z[0]) * std::tanh(z[2]);
    h(j) = sigmoid(z[3]) * std::tanh(c(j));
  }
}

MatrixXd random_matrix(Rng& rng, int r, int c) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
  return m;
}

VectorXd random_vector(Rng& rng, int n) { return random_matrix(rng, n, 1).col(0); }

}  // namespace

TEST_CASE("init_parameters shapes and determinism") {
  const auto c = tiny_config(7, 4, 3);
  const auto a = init_parameters(c, 1);
  const auto b = init_parameters(c, 1);
  const auto d = init_parameters(c, 2);
  CHECK(a.src_embed.rows() == 7);
  CHECK(a.src_embed.cols() == 4);
  CHECK(a.encoder.input.rows() == 12);
  CHECK(a.encoder.input.cols() == 4);
  CHECK(a.encoder.recurrent.cols() == 3);
  CHECK(a.attention.rows() == 3);
  CHECK(a.combine.cols() == 6);
  CHECK(a.output.rows() == 7);
  CHECK(a.src_embed == b.src_embed);
  CHECK(a.output == b.output);
  CHECK(a.src_embed != d.src_embed);
  CHECK(a.src_embed.cwiseAbs().maxCoeff() < 0.1);
  CHECK(same_shapes(a, zeros_like(a)));
  CHECK(parameter_count(a) == 7 * 4 * 2 + 2 * (12 * 4 + 12 * 3 + 12) + 9 + 18 + 3 + 21 + 7);
}

TEST_CASE("config validation and canonical form") {
  auto c = tiny_config();
  CHECK(parse_model_config(c.canonical()) == c);
  CHECK(c.fingerprint() == tiny_config().fingerprint());
  auto other = c;
  other.hidden = 5;
  CHECK(other.fingerprint() != c.fingerprint());
  other.num_layers = 2;
  CHECK_THROWS_AS(other.validate(), Error);
}

TEST_CASE("lstm_step hand cases") {
  const MatrixXd W = MatrixXd::Zero(4, 2), U = MatrixXd::Zero(4, 1);
  const VectorXd b = VectorXd::Zero(4), x = VectorXd::Ones(2), h0 = VectorXd::Zero(1);
  const auto zero = lstm_step(W, U, b, x, h0, VectorXd::Zero(1));
  CHECK(zero.h(0) == 0.0);
  CHECK(zero.c(0) == 0.0);
  const auto one = lstm_step(W, U, b, x, h0, VectorXd::Ones(1));
  CHECK(one.c(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.h(0) == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
  CHECK(one.h(0) == doctest::Approx(0.23105).epsilon(1e-4));
}

TEST_CASE("lstm_step matches a scalar reference") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int e = 1 + static_cast<int>(rng.uniform_index(5));
    const int h = 1 + static_cast<int>(rng.uniform_index(4));
    const auto W = random_matrix(rng, 4 * h, e);
    const auto U = random_matrix(rng, 4 * h, h);
    const auto b = random_vector(rng, 4 * h);
    const auto x = random_vector(rng, e);
    const auto hp = random_vector(rng, h);
    const auto cp = random_vector(rng, h);
    VectorXd rh, rc;
    reference_lstm(W, U, b, x, hp, cp, rh, rc);
    const auto out = lstm_step(W, U, b, x, hp, cp);
    CHECK((out.h - rh).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((out.c - rc).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("encode_sequence composes lstm steps") {
  const auto p = init_parameters(tiny_config(), 3, 0.5);
  const std::vector<TokenId> ids = {4, 6, 5};
  const auto enc = encode_sequence(p, ids);
  REQUIRE(enc.states.rows() == 3);
  VectorXd h = VectorXd::Zero(3), c = VectorXd::Zero(3);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    VectorXd nh, nc;
    reference_lstm(p.encoder.input, p.encoder.recurrent, p.encoder.bias,
                   p.src_embed.row(ids[t]).transpose(), h, c, nh, nc);
    h = nh;
    c = nc;
    CHECK((enc.states.row(static_cast<Eigen::Index>(t)).transpose() - h).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK((enc.final_c - c).cwiseAbs().maxCoeff() < 1e-14);

  const auto zero = encode_sequence(zero_parameters(tiny_config()), ids);
  CHECK(zero.states.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(encode_sequence(p, {}), Error);
  CHECK_THROWS_AS(encode_sequence(p, {7}), Error);
}

TEST_CASE("attention hand cases") {
  EncoderStates enc;
  enc.states.resize(2, 2);
  enc.states << 1, 0, 0, 0;
  const VectorXd q = (VectorXd(2) << 1, 0).finished();
  const auto a = attend(q, enc, MatrixXd::Identity(2, 2));
  CHECK(a.weights(0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1)).epsilon(1e-14));
  CHECK(a.weights(0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(a.weights(1) == doctest::Approx(0.2689).epsilon(1e-4));
  const auto dot = attend(q, enc, MatrixXd::Zero(2, 2), AttentionScore::kDot);
  CHECK(dot.weights(0) == doctest::Approx(a.weights(0)).epsilon(1e-14));

  EncoderStates three;
  three.states = (MatrixXd(3, 2) << 1, 2, 3, 4, 5, 9).finished();
  const auto u = attend(q, three, MatrixXd::Zero(2, 2));
  for (int t = 0; t < 3; ++t) CHECK(u.weights(t) == doctest::Approx(1.0 / 3));
  CHECK(u.context(0) == doctest::Approx(3.0));
  CHECK(u.context(1) == doctest::Approx(5.0));

  EncoderStates single;
  single.states = (MatrixXd(1, 2) << 0.3, -0.7).finished();
  const auto s = attend(q, single, MatrixXd::Identity(2, 2));
  CHECK(s.weights(0) == 1.0);
  CHECK(s.context(1) == -0.7);
}

TEST_CASE("loss hand cases") {
  const auto c = tiny_config(7, 4, 3);
  const auto batch = make_batch({{4, 5}, {6}}, {{5, 6, 4}, {4}});
  CHECK(batch.target_tokens() == 6);
  const auto zero = forward_loss(zero_parameters(c), batch);
  CHECK(zero.loss == doctest::Approx(std::log(7.0)).epsilon(1e-14));
  CHECK(zero.tokens == 6);

  auto confident = zero_parameters(c);
  confident.output_bias(subword::kEosId) = 1000.0;
  const auto eos_only = make_batch({{4}}, {{}});
  CHECK(forward_loss(confident, eos_only).loss == doctest::Approx(0.0).epsilon(1e-12));
  const auto g = backward(confident, eos_only);
  CHECK(g.output_bias.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("batched loss equals the sequential decoder") {
  const auto c = tiny_config(9, 5, 4);
  const auto p = init_parameters(c, 8, 0.5);
  const std::vector<std::vector<TokenId>> src = {{4, 5, 6}, {7}, {8, 8}};
  const std::vector<std::vector<TokenId>> tgt = {{5}, {6, 7, 8, 4}, {}};
  const auto batch = make_batch(src, tgt);
  double nll = 0.0;
  int tokens = 0;
  for (std::size_t r = 0; r < src.size(); ++r) {
    const auto enc = encode_sequence(p, src[r]);
    DecoderState state{VectorXd(enc.final_h), VectorXd(enc.final_c)};
    std::vector<TokenId> inputs = {subword::kBosId};
    inputs.insert(inputs.end(), tgt[r].begin(), tgt[r].end());
    std::vector<TokenId> gold = tgt[r];
    gold.push_back(subword::kEosId);
    for (std::size_t t = 0; t < gold.size(); ++t) {
      const auto step = decoder_step(p, enc, inputs[t], state);
      nll -= step.log_probs(gold[t]);
      state = step.state;
      ++tokens;
    }
  }
  const auto loss = forward_loss(p, batch);
  CHECK(loss.tokens == tokens);
  CHECK(loss.loss == doctest::Approx(nll / tokens).epsilon(1e-12));
}

TEST_CASE("gradient check on tiny models") {
  Rng rng(17);
  for (auto score : {AttentionScore::kGeneral, AttentionScore::kDot}) {
    const auto c = tiny_config(7, 4, 3, score);
    const auto p = init_parameters(c, 5, 0.5);
    const auto batch = random_batch(rng, 3, 7, 3);
    const auto result = gradient_check(p, batch, 1e-5);
    CHECK(result.max_relative_error < 1e-4);
    CHECK(result.coordinates_checked == parameter_count(p));
  }
}

TEST_CASE("gradient check catches a corrupted attention gradient") {
  Rng rng(2);
  const auto c = tiny_config(7, 4, 3);
  const auto p = init_parameters(c, 6, 0.5);
  const auto batch = random_batch(rng, 2, 7, 3);
  const auto result = gradient_check(p, batch, 1e-5, 200, 0, [](const Parameters& q, const Batch& b) {
    auto g = backward(q, b);
    g.attention *= 1.5;
    g.attention.array() += 0.01;
    return g;
  });
  CHECK(result.max_relative_error > 1e-2);
  CHECK(result.worst_tensor.find("attention") != std::string::npos);
}

TEST_CASE("degenerate and duplicated batches") {
  Rng rng(9);
  const auto c = tiny_config(7, 4, 3);
  const auto batch = random_batch(rng, 3, 7, 4);
  const auto zero = gradient_check(zero_parameters(c), batch);
  CHECK(std::isfinite(zero.max_relative_error));
  CHECK(all_finite(backward(zero_parameters(c), batch)));

  const auto p = init_parameters(c, 3, 0.5);
  std::vector<std::vector<TokenId>> src = {{4, 5}, {6, 5, 4}}, tgt = {{6}, {4, 4}};
  auto src2 = src, tgt2 = tgt;
  src2.insert(src2.end(), src.begin(), src.end());
  tgt2.insert(tgt2.end(), tgt.begin(), tgt.end());
  const auto g1 = backward(p, make_batch(src, tgt));
  const auto g2 = backward(p, make_batch(src2, tgt2));
  CHECK((g1.attention - g2.attention).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g1.src_embed - g2.src_embed).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g1.output_bias - g2.output_bias).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dropout is seeded and only active in training") {
  auto c = tiny_config(7, 4, 3);
  c.dropout = 0.3;
  const auto p = init_parameters(c, 1, 0.5);
  Rng rng(1);
  const auto batch = random_batch(rng, 4, 7, 4);
  const auto a = loss_and_gradients(p, batch, true, 42);
  const auto b = loss_and_gradients(p, batch, true, 42);
  const auto d = loss_and_gradients(p, batch, true, 43);
  CHECK(a.result.loss == b.result.loss);
  CHECK(a.grads.output == b.grads.output);
  CHECK(a.result.loss != d.result.loss);
  CHECK(forward_loss(p, batch).loss == forward_loss(p, batch, false, 99).loss);
  CHECK(loss_and_gradients(p, batch).result.loss == doctest::Approx(forward_loss(p, batch).loss));
}

TEST_CASE("validate_batch rejects malformed input") {
  const auto p = init_parameters(tiny_config(), 1);
  auto batch = make_batch({{4, 5}}, {{6}});
  CHECK_NOTHROW(validate_batch(p, batch));
  auto bad = batch;
  bad.src(0, 0) = 99;
  CHECK_THROWS_AS(validate_batch(p, bad), Error);
  bad = batch;
  bad.tgt(0, 0) = 5;
  CHECK_THROWS_AS(validate_batch(p, bad), Error);
  bad = batch;
  bad.src_len[0] = 7;
  CHECK_THROWS_AS(validate_batch(p, bad), Error);
}
