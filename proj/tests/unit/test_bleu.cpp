#include <doctest.h>

#include "lrmt/bleu.hpp"
#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"
#include "test_util.hpp"

using namespace lrmt;
using namespace lrmt::bleu;

TEST_CASE("evaluation tokenizer") {
  CHECK(eval_tokenize("Hello, world!") == std::vector<std::string>{"Hello", ",", "world", "!"});
  CHECK(eval_tokenize("3.14") == std::vector<std::string>{"3.14"});
  CHECK(eval_tokenize("abc") == std::vector<std::string>{"abc"});
  CHECK(eval_tokenize("1,000 et 2.") == std::vector<std::string>{"1,000", "et", "2", "."});
  CHECK(eval_tokenize("l'ñaar") == std::vector<std::string>{"l", "'", "ñaar"});
  CHECK(eval_tokenize("  ").empty());
}

TEST_CASE("identical corpora score exactly 100") {
  const std::vector<std::string> refs = {"the cat sat on the mat", "a b c d e", "ñaar ñett"};
  const auto s = corpus_bleu(refs, refs);
  CHECK(s.score == 100.0);
  CHECK(s.bp == 1.0);
  for (double p : s.precisions) CHECK(p == 100.0);
}

TEST_CASE("hand-derived example") {
  const auto s = corpus_bleu({"the cat sat on mat"}, {"the cat sat on the mat"});
  CHECK(s.matches == std::array<std::int64_t, 4>{5, 3, 2, 1});
  CHECK(s.totals == std::array<std::int64_t, 4>{5, 4, 3, 2});
  CHECK(s.bp == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
  CHECK(s.score == doctest::Approx(100.0 * std::exp(-0.2) * std::pow(0.25, 0.25)).epsilon(1e-12));
  CHECK(std::abs(s.score - 57.89) <= 0.01);
  CHECK(s.format() == "BLEU = 57.89 100.0/75.0/66.7/50.0 (BP = 0.819, sys_len = 5, ref_len = 6)");
}

TEST_CASE("empty hypothesis and errors") {
  const auto s = corpus_bleu({""}, {"a b c d"});
  CHECK(s.score == 0.0);
  CHECK(s.totals[3] == 0);
  CHECK(s.sys_len == 0);
  try {
    corpus_bleu({"a"}, {"a", "b"});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
  CHECK_THROWS_AS(corpus_bleu({}, {}), Error);
}

TEST_CASE("clipping and lowercase") {
  const auto s = corpus_bleu({"the the the the"}, {"the cat"});
  CHECK(s.matches[0] == 1);
  CHECK(s.totals[0] == 4);
  CHECK(corpus_bleu({"The Cat sat down"}, {"the cat sat down"}, true).score == 100.0);
  CHECK(corpus_bleu({"The Cat sat down"}, {"the cat sat down"}).score < 100.0);
}

TEST_CASE("random corpora agree with brute-force enumeration") {
  Rng rng(77);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::string> hyps, refs;
    const int n = 1 + static_cast<int>(rng.uniform_index(6));
    for (int i = 0; i < n; ++i) {
      std::string h, r;
      const int lh = static_cast<int>(rng.uniform_index(9));
      const int lr = 1 + static_cast<int>(rng.uniform_index(8));
      for (int k = 0; k < lh; ++k) h += (k ? " " : "") + words[rng.uniform_index(words.size())];
      for (int k = 0; k < lr; ++k) r += (k ? " " : "") + words[rng.uniform_index(words.size())];
      hyps.push_back(h);
      refs.push_back(r);
    }
    CHECK(corpus_bleu(hyps, refs).score == doctest::Approx(testutil::brute_force_bleu(hyps, refs)).epsilon(1e-10));
  }
}
