#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "lrmt/decoding.hpp"
#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"
#include "lrmt/synthetic.hpp"

using namespace lrmt;
using namespace lrmt::decoding;
using subword::kBosId;
using subword::kEosId;

namespace {

constexpr int kVocab = 7;
constexpr TokenId A = 4, B = 5, C = 6;

// Scorer driven by a function of the emitted prefix; the state is the prefix.
class PrefixScorer : public StepScorer {
 public:
  using Fn = std::function<std::vector<double>(const std::vector<TokenId>&)>;
  explicit PrefixScorer(Fn fn) : fn_(std::move(fn)) {}

  std::any initial_state() const override { return std::vector<TokenId>{}; }
  std::pair<Eigen::VectorXd, std::any> step(const std::any& state, TokenId prev) const override {
    auto prefix = std::any_cast<std::vector<TokenId>>(state);
    if (prev != kBosId) prefix.push_back(prev);
    const auto probs = fn_(prefix);
    Eigen::VectorXd lp(static_cast<Eigen::Index>(probs.size()));
    for (std::size_t i = 0; i < probs.size(); ++i) lp(static_cast<Eigen::Index>(i)) = std::log(probs[i]);
    return {lp, prefix};
  }

 private:
  Fn fn_;
};

std::vector<double> dist(std::map<TokenId, double> mass) {
  std::vector<double> p(kVocab, 1e-12);
  for (auto [t, m] : mass) p[t] = m;
  return p;
}

// Step-1 A:0.6 B:0.4; after A the best continuation is C at 0.3; after B
// eos has 0.9.
std::vector<double> two_step_tree(const std::vector<TokenId>& prefix) {
  if (prefix.empty()) return dist({{A, 0.6}, {B, 0.4}});
  if (prefix == std::vector<TokenId>{A}) return dist({{C, 0.3}, {kEosId, 0.25}, {A, 0.25}, {B, 0.2}});
  if (prefix == std::vector<TokenId>{B}) return dist({{kEosId, 0.9}, {A, 0.1}});
  return dist({{kEosId, 1.0}});
}

// Best hypothesis by exhaustive enumeration: sequences ending in eos, or
// cut off at the length cap.
double exhaustive_best(const PrefixScorer::Fn& fn, std::vector<TokenId> prefix, double lp,
                       std::size_t max_len) {
  if (prefix.size() == max_len) return lp;
  const auto p = fn(prefix);
  double best = lp + std::log(p[kEosId]);
  {
    for (TokenId t = 4; t < kVocab; ++t) {
      auto next = prefix;
      next.push_back(t);
      best = std::max(best, exhaustive_best(fn, next, lp + std::log(p[t]), max_len));
    }
  }
  return best;
}

model::Parameters random_model(std::uint64_t seed) {
  model::ModelConfig c;
  c.embed_dim = 5;
  c.hidden = 4;
  c.src_vocab_size = 9;
  c.tgt_vocab_size = 9;
  return model::init_parameters(c, seed, 1.0);
}

}  // namespace

TEST_CASE("beam finds the better two-step hypothesis") {
  const PrefixScorer scorer(two_step_tree);
  const auto greedy = greedy_search(scorer, 10);
  CHECK(greedy.tokens == std::vector<TokenId>{A, C});
  CHECK(greedy.log_prob == doctest::Approx(std::log(0.18)));
  const auto beam = beam_search(scorer, 10, {2, 0.0});
  CHECK(beam.tokens == std::vector<TokenId>{B});
  CHECK(beam.finished);
  CHECK(beam.log_prob == doctest::Approx(std::log(0.36)));
}

TEST_CASE("eos-first and cycling stubs") {
  const PrefixScorer eos([](const std::vector<TokenId>&) { return dist({{kEosId, 0.99}}); });
  for (int k : {1, 2, 5}) CHECK(beam_search(eos, 10, {k, 0.0}).tokens.empty());
  CHECK(greedy_search(eos, 10).tokens.empty());

  const PrefixScorer cycle([](const std::vector<TokenId>& prefix) {
    return dist({{static_cast<TokenId>(4 + prefix.size() % 3), 0.9}});
  });
  const std::size_t cap = max_output_length(3);
  CHECK(cap == 16);
  const auto g = greedy_search(cycle, cap);
  CHECK(g.tokens.size() == cap);
  CHECK_FALSE(g.finished);
  CHECK(beam_search(cycle, cap, {3, 0.0}).tokens.size() == cap);

  // Pad and bos are never emitted even when favored.
  const PrefixScorer special([](const std::vector<TokenId>& prefix) {
    return prefix.size() < 2 ? dist({{0, 0.5}, {kBosId, 0.4}, {A, 0.1}}) : dist({{kEosId, 1.0}});
  });
  CHECK(greedy_search(special, 10).tokens == std::vector<TokenId>{A, A});
  CHECK(beam_search(special, 10, {3, 0.0}).tokens == std::vector<TokenId>{A, A});
}

TEST_CASE("wide beam equals exhaustive search on random stubs") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::map<std::vector<TokenId>, std::vector<double>> table;
    PrefixScorer::Fn fn = [&table, &rng](const std::vector<TokenId>& prefix) {
      auto it = table.find(prefix);
      if (it == table.end()) {
        std::vector<double> p(kVocab, 0.0);
        double sum = 0.0;
        for (TokenId t = kEosId; t < kVocab; ++t) sum += (p[t] = 0.05 + rng.uniform01());
        for (auto& x : p) x = std::max(x / sum, 1e-12);
        it = table.emplace(prefix, p).first;
      }
      return it->second;
    };
    const std::size_t max_len = 4;
    const double oracle = exhaustive_best(fn, {}, 0.0, max_len);
    const auto hyp = beam_search(PrefixScorer(fn), max_len, {200, 0.0});
    CHECK(hyp.log_prob == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("beam size 1 equals greedy on real models") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto params = random_model(seed);
    const std::vector<TokenId> src = {4, 5, 6, 7};
    const auto greedy = greedy_decode(params, src);
    CHECK(beam_decode(params, src, {1, 0.0}) == greedy);
    CHECK(decode(params, src, {1, 0.0}) == greedy);
    CHECK(greedy.size() <= max_output_length(src.size()));
    const auto wide = beam_decode(params, src, {4, 0.0});
    CHECK(wide.size() <= max_output_length(src.size()));
  }
}

TEST_CASE("length penalty and config validation") {
  CHECK_THROWS_AS((DecodeConfig{0, 0.0}).validate(), Error);
  CHECK_THROWS_AS((DecodeConfig{2, -1.0}).validate(), Error);
  const PrefixScorer scorer(two_step_tree);
  const auto hyp = beam_search(scorer, 10, {3, 1.0});
  CHECK(hyp.finished);
}

TEST_CASE("translate_lines handles empty sources") {
  const auto corpus = synthetic::generate_copy_corpus(20, 5, 2, 4, 1);
  const auto model = subword::word_model(subword::build_word_vocab(corpus.source_lines(), 100));
  model::ModelConfig c;
  c.embed_dim = 4;
  c.hidden = 4;
  c.src_vocab_size = static_cast<int>(model.vocab().size());
  c.tgt_vocab_size = c.src_vocab_size;
  const auto params = model::init_parameters(c, 1);
  const auto out = translate_lines(params, model, model, {"", corpus.pairs[0].source_text}, {});
  REQUIRE(out.size() == 2);
  CHECK(out[0].empty());
}
