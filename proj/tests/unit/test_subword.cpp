#include <doctest.h>

#include <map>

#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"
#include "lrmt/subword.hpp"
#include "lrmt/synthetic.hpp"
#include "lrmt/text.hpp"
#include "test_util.hpp"

using namespace lrmt;
using namespace lrmt::subword;

namespace {

const std::string kMark(kBoundaryMarker);

// Characters of a word (as UTF-8 strings) preceded by the boundary marker.
std::vector<std::string> initial(const std::string& word) {
  std::vector<std::string> out = {kMark};
  for (auto cp : text::decode_utf8(word)) out.push_back(text::encode_utf8(cp));
  return out;
}

std::map<std::pair<std::string, std::string>, int> count_pairs(
    const std::vector<std::vector<std::string>>& words) {
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& w : words) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) counts[{w[i], w[i + 1]}]++;
  }
  return counts;
}

void replay(std::vector<std::string>& w, const std::pair<std::string, std::string>& m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 1 < w.size() && w[i] == m.first && w[i + 1] == m.second) {
      out.push_back(m.first + m.second);
      ++i;
    } else {
      out.push_back(w[i]);
    }
  }
  w = out;
}

std::string random_text(Rng& rng, const std::string& alphabet, int max_words) {
  std::string s;
  const int words = static_cast<int>(rng.uniform_index(max_words + 1));
  for (int i = 0; i < words; ++i) {
    s += std::string(1 + rng.uniform_index(2), ' ');
    const int len = 1 + static_cast<int>(rng.uniform_index(8));
    for (int k = 0; k < len; ++k) s += alphabet[rng.uniform_index(alphabet.size())];
  }
  return s;
}

}  // namespace

TEST_CASE("first merge on the ab fixture") {
  const auto model = train_bpe({"ab ab ab abc"}, 100, 2);
  REQUIRE(!model.merges().empty());
  CHECK(model.merges()[0] == std::pair<std::string, std::string>{"a", "b"});

  // Brute-force pair counts on the initialized sequences.
  std::vector<std::vector<std::string>> words;
  for (const auto& w : text::split_words("ab ab ab abc")) words.push_back(initial(w));
  const auto counts = count_pairs(words);
  CHECK(counts.at({"a", "b"}) == 4);
  CHECK(counts.at({kMark, "a"}) == 4);
  CHECK(std::string("ab") < kMark + "a");
}

TEST_CASE("single character line gives no merges") {
  const auto model = train_bpe({"a"}, 100, 2);
  CHECK(model.merges().empty());
  CHECK(model.vocab().size() == 6);
  CHECK(model.vocab().contains("a"));
  CHECK(model.vocab().contains(kMark));
  CHECK(model.vocab().piece(kPadId) == kPadPiece);
  CHECK(model.vocab().piece(kEosId) == kEosPiece);
}

TEST_CASE("train_bpe errors") {
  try {
    train_bpe({}, 100);
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
  }
  try {
    train_bpe({"abc"}, 6);
    FAIL("expected VocabTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVocabTooSmall);
  }
}

TEST_CASE("training is deterministic and respects vocab size") {
  const auto corpus = synthetic::generate_toy_corpus(300, {}, 2);
  auto lines = corpus.source_lines();
  const auto a = train_bpe(lines, 400);
  const auto b = train_bpe(lines, 400);
  CHECK(a == b);
  CHECK(a.vocab().size() <= 400);
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("merge replay reproduces counts at creation") {
  const auto corpus = synthetic::generate_toy_corpus(200, {}, 6);
  const auto lines = corpus.target_lines();
  const std::size_t min_freq = 3;
  const auto model = train_bpe(lines, 300, min_freq);
  std::vector<std::vector<std::string>> words;
  for (const auto& line : lines) {
    for (const auto& w : text::split_words(line)) words.push_back(initial(w));
  }
  for (const auto& merge : model.merges()) {
    const auto counts = count_pairs(words);
    // The chosen pair has the top count, ties broken by the smallest
    // concatenation.
    int top = 0;
    std::string top_joined;
    for (const auto& [p, c] : counts) {
      if (c > top || (c == top && p.first + p.second < top_joined)) {
        top = c;
        top_joined = p.first + p.second;
      }
    }
    CHECK(counts.at(merge) == top);
    CHECK(merge.first + merge.second == top_joined);
    CHECK(counts.at(merge) >= static_cast<int>(min_freq));
    CHECK(model.vocab().contains(merge.first + merge.second));
    for (auto& w : words) replay(w, merge);
  }
}

TEST_CASE("encode with a single merge") {
  Vocabulary vocab(VocabMode::kBpe);
  const auto mark = vocab.add(kMark);
  vocab.add("a");
  vocab.add("b");
  const auto ab = vocab.add("ab");
  const BpeModel model(vocab, {{"a", "b"}});
  CHECK(encode(model, "ab") == std::vector<TokenId>{mark, ab});
  CHECK(encode_pieces(model, "ab ba") == std::vector<std::string>{kMark, "ab", kMark, "b", "a"});
  CHECK(decode(model, encode(model, "ab  ba ")) == "ab ba");
  const auto with_unk = encode(model, "abz");
  CHECK(std::find(with_unk.begin(), with_unk.end(), kUnkId) != with_unk.end());
  CHECK_THROWS_AS(decode(model, {99}), Error);
}

TEST_CASE("encode output never has pad/bos/eos and stays in range") {
  const auto corpus = synthetic::generate_toy_corpus(200, {}, 7);
  const auto model = train_bpe(corpus.target_lines(), 250);
  const auto fresh = synthetic::generate_toy_corpus(50, {}, 70);
  for (const auto& line : fresh.target_lines()) {
    for (auto id : encode(model, line)) {
      CHECK(id != kPadId);
      CHECK(id != kBosId);
      CHECK(id != kEosId);
      CHECK(static_cast<std::size_t>(id) < model.vocab().size());
    }
  }
}

TEST_CASE("decode inverts encode on in-alphabet strings") {
  const std::string alphabet = "abcde";
  Rng rng(3);
  std::vector<std::string> train;
  for (int i = 0; i < 200; ++i) train.push_back(random_text(rng, alphabet, 6));
  const auto model = train_bpe(train, 120);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_text(rng, alphabet, 6);
    CHECK(decode(model, encode(model, s)) == text::normalize_spaces(s));
  }
  // encode_lines agrees with encode.
  const auto batch = encode_lines(model, train);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(batch[i] == encode(model, train[i]));
}

TEST_CASE("word vocabulary") {
  const auto vocab = build_word_vocab({"a a b"}, 6);
  CHECK(vocab.size() == 6);
  CHECK(vocab.id_of("a") < vocab.id_of("b"));
  CHECK(vocab.id_of("a") >= kNumReserved);
  const auto small = build_word_vocab({"a a b"}, 5);
  CHECK(small.id_of("b") == kUnkId);
  CHECK_THROWS_AS(build_word_vocab({}, 10), Error);

  const auto model = word_model(vocab);
  CHECK(encode(model, "b a c") == std::vector<TokenId>{vocab.id_of("b"), vocab.id_of("a"), kUnkId});
  CHECK(decode(model, encode(model, "a  b")) == "a b");
}

TEST_CASE("model file roundtrip and errors") {
  const auto model = train_bpe(synthetic::generate_toy_corpus(100, {}, 1).target_lines(), 200);
  const std::string bytes = serialize_model(model);
  CHECK(bytes.rfind("lrmt-subword 1 bpe ", 0) == 0);
  const auto back = parse_model(bytes);
  CHECK(back == model);
  CHECK(serialize_model(back) == bytes);

  const auto dir = testutil::temp_dir("bpe");
  save_model(model, dir / "m.model");
  CHECK(load_model(dir / "m.model") == model);
  std::filesystem::remove_all(dir);

  try {
    parse_model(bytes.substr(0, bytes.size() / 2));
    FAIL("expected CorruptModelFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptModelFile);
  }
  std::string wrong = bytes;
  wrong.replace(0, std::string("lrmt-subword 1").size(), "lrmt-subword 9");
  try {
    parse_model(wrong);
    FAIL("expected FormatVersionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormatVersionMismatch);
  }

  const auto words = word_model(build_word_vocab({"x y y"}, 10));
  CHECK(parse_model(serialize_model(words)) == words);
}
