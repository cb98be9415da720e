#include <doctest.h>

#include <numeric>
#include <set>

#include "lrmt/corpus.hpp"
#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"
#include "lrmt/synthetic.hpp"
#include "lrmt/text.hpp"
#include "test_util.hpp"

using namespace lrmt;
using namespace lrmt::corpus;

namespace {

std::vector<LanguageProfile> toy_profiles() {
  const auto sample = synthetic::generate_toy_corpus(100, {}, 11);
  return {build_profile("fr", sample.source_lines()), build_profile("wo", sample.target_lines())};
}

ParallelCorpus make_corpus(const std::vector<std::pair<std::string, std::string>>& rows) {
  ParallelCorpus c{{}, "fr", "wo"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    c.pairs.push_back({static_cast<std::int64_t>(i), rows[i].first, rows[i].second});
  }
  return c;
}

}  // namespace

TEST_CASE("load_parallel reads aligned files") {
  const auto dir = testutil::temp_dir("load");
  testutil::write_text(dir / "a.src", "un\ndeux\ntrois\n");
  testutil::write_text(dir / "a.tgt", "benn\nñaar\nñett\n");
  const auto c = load_parallel(dir / "a.src", dir / "a.tgt", "fr", "wo");
  REQUIRE(c.size() == 3);
  CHECK(c.ids() == std::vector<std::int64_t>{0, 1, 2});
  CHECK(c.pairs[1].target_text == "ñaar");

  testutil::write_text(dir / "e.src", "");
  testutil::write_text(dir / "e.tgt", "");
  CHECK(load_parallel(dir / "e.src", dir / "e.tgt", "fr", "wo").empty());

  testutil::write_text(dir / "b.tgt", "1\n2\n3\n4\n");
  try {
    load_parallel(dir / "a.src", dir / "b.tgt", "fr", "wo");
    FAIL("expected LineCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLineCountMismatch);
  }

  testutil::write_text(dir / "bad.tgt", "a\n\xC3\nc\n");
  try {
    load_parallel(dir / "a.src", dir / "bad.tgt", "fr", "wo");
    FAIL("expected EncodingError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEncodingError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("save and reload keeps ids") {
  const auto dir = testutil::temp_dir("save");
  auto c = make_corpus({{"a b", "c"}, {"d", "e f"}});
  c.pairs[0].id = 17;
  save_parallel(c, dir / "x");
  const auto back = load_saved(dir / "x", "fr", "wo");
  CHECK(back.pairs == c.pairs);
  std::filesystem::remove_all(dir);
}

TEST_CASE("normalize_pair examples") {
  CHECK(normalize_pair({0, "voir http://ex.com/a ici", "gis ko fi"}) ==
        SentencePair{0, "voir ici", "gis ko fi"});
  CHECK(normalize_pair({0, "abc", "def"}) == SentencePair{0, "abc", "def"});
  CHECK(normalize_pair({0, "www.ex.com", "x"}) == SentencePair{0, "", "x"});
  CHECK(normalize_text("a\x07" "b\tc\u00A0 d  ") == "ab c d");
  CHECK(normalize_text("see HTTPS://x.y/z?q=1, ok") == "see ok");
  CHECK(normalize_text("mailto:x") == "mailto:x");
}

TEST_CASE("normalize_pair is idempotent") {
  Rng rng(5);
  const std::vector<std::string> parts = {"a", " ", "\t", "http://u.v/w", "www.q.r", "\x01", "é",
                                          "  ", "\u2003", "x://", "www.", "b"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng.uniform_index(8));
    for (int i = 0; i < n; ++i) s += parts[rng.uniform_index(parts.size())];
    const std::string once = normalize_text(s);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("same_language examples") {
  const auto profiles = toy_profiles();
  const auto wo = synthetic::generate_toy_corpus(1, {}, 12).pairs[0].target_text;
  CHECK(same_language({0, wo, wo}, profiles));
  CHECK_FALSE(same_language({0, "ab", "ab"}, profiles));
  CHECK_THROWS_AS(same_language({0, "abc", "abc"}, {}), Error);

  // Fresh toy pairs classify to different languages; check against a
  // brute-force cosine computation as well.
  const auto sample = synthetic::generate_toy_corpus(100, {}, 11);
  const auto fresh = synthetic::generate_toy_corpus(20, {}, 99);
  for (const auto& pair : fresh.pairs) {
    CHECK_FALSE(same_language(pair, profiles));
    const double src_fr = testutil::trigram_cosine(sample.source_lines(), pair.source_text);
    const double src_wo = testutil::trigram_cosine(sample.target_lines(), pair.source_text);
    const double tgt_fr = testutil::trigram_cosine(sample.source_lines(), pair.target_text);
    const double tgt_wo = testutil::trigram_cosine(sample.target_lines(), pair.target_text);
    CHECK(src_fr > src_wo);
    CHECK(tgt_wo > tgt_fr);
    CHECK(profile_similarity(profiles[0], pair.source_text) == doctest::Approx(src_fr).epsilon(1e-12));
    CHECK(profile_similarity(profiles[1], pair.target_text) == doctest::Approx(tgt_wo).epsilon(1e-12));
  }
}

TEST_CASE("filter_corpus hand-built six pairs") {
  const auto base = synthetic::generate_toy_corpus(4, {}, 3);
  std::string long_source;
  for (int i = 0; i < 40; ++i) long_source += (i ? " " : "") + std::string("lévo");
  const auto c = make_corpus({
      {base.pairs[0].source_text, base.pairs[0].target_text},
      {base.pairs[0].source_text, base.pairs[0].target_text},  // duplicate
      {"12345 678", "12345 678"},                              // identical, unknown language
      {long_source, base.pairs[1].target_text},                // overlong
      {base.pairs[2].source_text, base.pairs[2].target_text},
      {base.pairs[3].source_text, base.pairs[3].target_text},
  });
  const auto [out, report] = filter_corpus(c, toy_profiles());
  CHECK(out.size() == 3);
  CHECK(report.identical_sides_removed == 1);
  CHECK(report.duplicate_removed == 1);
  CHECK(report.overlong_removed == 1);
  CHECK(report.same_language_removed == 0);
  CHECK(report.emptied_removed == 0);
  CHECK(report.retained == 3);
  CHECK(report.reconciles());
  CHECK(out.ids() == std::vector<std::int64_t>{0, 4, 5});
}

TEST_CASE("filter_corpus trivial cases") {
  const auto profiles = toy_profiles();
  const auto [empty_out, empty_report] = filter_corpus(make_corpus({}), profiles);
  CHECK(empty_out.empty());
  CHECK(empty_report == FilterReport{});

  const auto pair = synthetic::generate_toy_corpus(1, {}, 8).pairs[0];
  const auto [out, report] = filter_corpus(
      make_corpus({{pair.source_text, pair.target_text}, {pair.source_text, pair.target_text},
                   {pair.source_text, pair.target_text}, {pair.source_text, pair.target_text}}),
      profiles);
  CHECK(out.size() == 1);
  CHECK(report.duplicate_removed == 3);

  const auto [e_out, e_report] = filter_corpus(make_corpus({{"http://a.b", "x y z"}}), profiles);
  CHECK(e_out.empty());
  CHECK(e_report.emptied_removed == 1);
  CHECK(e_report.normalized_modified == 1);
}

TEST_CASE("filter_corpus is idempotent and reconciles") {
  const auto profiles = toy_profiles();
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = synthetic::generate_toy_corpus(200, {}, 100 + trial);
    // Sprinkle noise: duplicates, identical sides, long lines, urls.
    for (int k = 0; k < 30; ++k) {
      auto& p = c.pairs[rng.uniform_index(c.size())];
      switch (rng.uniform_index(4)) {
        case 0: p = c.pairs[rng.uniform_index(c.size())]; break;
        case 1: p.target_text = p.source_text; break;
        case 2: p.source_text += " " + p.source_text + " " + p.source_text; break;
        default: p.source_text += " www.x.org"; break;
      }
    }
    for (std::size_t i = 0; i < c.size(); ++i) c.pairs[i].id = static_cast<std::int64_t>(i);
    const auto [once, r1] = filter_corpus(c, profiles);
    CHECK(r1.reconciles());
    const auto [twice, r2] = filter_corpus(once, profiles);
    CHECK(twice.pairs == once.pairs);
    CHECK(r2.retained == r1.retained);
  }
}

TEST_CASE("apportion uses largest remainders") {
  CHECK(apportion(10, {1, 1, 1}) == std::vector<std::size_t>{4, 3, 3});
  CHECK(apportion(7, {5, 3, 2}) == std::vector<std::size_t>{4, 2, 1});
  CHECK(apportion(0, {5, 3}) == std::vector<std::size_t>{0, 0});
  const auto a = apportion(16000, {12300, 12300, 12300, 12300, 12300, 12300, 12300, 12300, 12300, 12300});
  CHECK(std::accumulate(a.begin(), a.end(), std::size_t{0}) == 16000);
}

TEST_CASE("length strata are equal-frequency deciles") {
  ParallelCorpus c{{}, "fr", "wo"};
  for (int i = 0; i < 100; ++i) c.pairs.push_back({i, std::string(1 + i % 7, 'a'), "b"});
  const auto strata = length_strata(c);
  std::vector<int> counts(kNumStrata, 0);
  for (int s : strata) counts[s]++;
  for (int k = 0; k < kNumStrata; ++k) CHECK(counts[k] == 10);
}

TEST_CASE("stratified_split sizes, disjointness, determinism") {
  const auto c = synthetic::generate_toy_corpus(1500, {}, 4);
  const auto a = stratified_split(c, 100, 50, 9);
  const auto b = stratified_split(c, 100, 50, 9);
  CHECK(a.valid.size() == 100);
  CHECK(a.test.size() == 50);
  CHECK(a.train_pool.size() == 1350);
  CHECK(a.valid.ids() == b.valid.ids());
  CHECK(a.test.ids() == b.test.ids());
  std::set<std::int64_t> all;
  for (const auto* part : {&a.valid, &a.test, &a.train_pool}) {
    for (auto id : part->ids()) CHECK(all.insert(id).second);
  }
  CHECK(all.size() == c.size());
  const auto other = stratified_split(c, 100, 50, 10);
  CHECK(other.valid.ids() != a.valid.ids());

  try {
    stratified_split(synthetic::generate_toy_corpus(15, {}, 1), 10, 10, 1);
    FAIL("expected SizesExceedCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSizesExceedCorpus);
  }
}

TEST_CASE("nested_subsets") {
  const auto pool = synthetic::generate_toy_corpus(300, {}, 2);
  const auto subsets = nested_subsets(pool, {100, 200, 300}, 5);
  REQUIRE(subsets.size() == 3);
  for (std::size_t k = 0; k + 1 < subsets.size(); ++k) {
    for (std::size_t i = 0; i < subsets[k].size(); ++i) {
      CHECK(subsets[k].pairs[i] == subsets[k + 1].pairs[i]);
    }
  }
  auto whole = subsets[2].ids();
  std::sort(whole.begin(), whole.end());
  CHECK(whole == pool.ids());
  CHECK(subsets[2].ids() != pool.ids());
  try {
    nested_subsets(pool, {301}, 5);
    FAIL("expected SizeExceedsPool");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSizeExceedsPool);
  }
}
