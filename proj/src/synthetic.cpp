// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/synthetic.hpp"

#include <array>
#include <set>

#include "lrmt/error.hpp"

namespace lrmt::synthetic {
namespace {

const std::vector<std::string> kSrcConsonants = {"p", "t", "l", "r", "s", "v", "d", "c", "qu", "ch"};
const std::vector<std::string> kSrcVowels = {"a", "e", "i", "o", "u", "é", "è", "ou", "ai"};
const std::vector<std::string> kTgtConsonants = {"b", "g", "j", "k", "ñ", "ŋ", "x", "w",
                                                 "y", "f", "mb", "nd", "ng", "gg"};
const std::vector<std::string> kTgtVowels = {"a", "e", "i", "o", "u", "ë", "à", "aa", "ee", "oo"};

const std::array<std::string, 6> kSrcPronouns = {"je", "tu", "il", "nous", "vous", "ils"};
const std::array<std::string, 6> kTgtPerson = {"naa", "nga", "na", "nanu", "ngeen", "nañu"};
const std::array<std::string, 3> kSrcTense = {"", "a", "va"};
const std::array<std::string, 3> kTgtTense = {"", "oon", "di"};
const std::array<std::string, 2> kSrcDet = {"le", "les"};
const std::array<std::string, 2> kTgtNumber = {"", "yi"};
// [possessor][number]; possessor 0 means none.
const std::array<std::array<std::string, 2>, 4> kSrcPoss = {
    {{"", ""}, {"mon", "mes"}, {"ton", "tes"}, {"son", "ses"}}};
const std::array<std::string, 4> kTgtPoss = {"", "am", "at", "om"};
const std::array<std::string, 4> kSrcCase = {"", "dans", "avec", "pour"};
const std::array<std::string, 4> kTgtCase = {"", "ci", "ak", "pur"};

const std::string& pick(Rng& rng, const std::vector<std::string>& items) {
  return items[rng.uniform_index(items.size())];
}

std::vector<std::string> make_lexicon(Rng& rng, int count, const std::vector<std::string>& consonants,
                                      const std::vector<std::string>& vowels, int min_syl,
                                      int max_syl, bool closed_final, std::set<std::string>& used) {
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < count) {
    const int syllables = min_syl + static_cast<int>(rng.uniform_index(max_syl - min_syl + 1));
    std::string w;
    for (int s = 0; s < syllables; ++s) w += pick(rng, consonants) + pick(rng, vowels);
    if (closed_final) w += pick(rng, consonants);
    if (used.insert(w).second) words.push_back(w);
  }
  return words;
}

}  // namespace

ToyLanguagePair::ToyLanguagePair(const ToyLanguageConfig& config) : config_(config) {
  if (config.noun_stems < 1 || config.verb_stems < 1 || config.min_noun_phrases < 0 ||
      config.max_noun_phrases < config.min_noun_phrases) {
    throw Error(ErrorCode::kInvalidArgument, "invalid toy language configuration");
  }
  Rng rng(config.lexicon_seed);
  std::set<std::string> used(kSrcPronouns.begin(), kSrcPronouns.end());
  for (const auto& w : {"le", "les", "mon", "mes", "ton", "tes", "son", "ses", "dans", "avec",
                        "pour", "a", "va"}) {
    used.insert(w);
  }
  src_nouns_ = make_lexicon(rng, config.noun_stems, kSrcConsonants, kSrcVowels, 2, 3, false, used);
  src_verbs_ = make_lexicon(rng, config.verb_stems, kSrcConsonants, kSrcVowels, 2, 2, true, used);
  tgt_nouns_ = make_lexicon(rng, config.noun_stems, kTgtConsonants, kTgtVowels, 1, 2, true, used);
  tgt_verbs_ = make_lexicon(rng, config.verb_stems, kTgtConsonants, kTgtVowels, 1, 2, false, used);
}

std::pair<std::string, std::string> ToyLanguagePair::sample(Rng& rng) const {
  std::vector<std::string> src, tgt;
  auto push_src = [&](const std::string& w) {
    if (!w.empty()) src.push_back(w);
  };

  const auto person = rng.uniform_index(kSrcPronouns.size());
  const auto tense = rng.uniform_index(kSrcTense.size());
  const auto verb = rng.uniform_index(src_verbs_.size());
  push_src(kSrcPronouns[person]);
  push_src(kSrcTense[tense]);
  push_src(src_verbs_[verb]);
  tgt.push_back(tgt_verbs_[verb] + kTgtTense[tense] + kTgtPerson[person]);

  const int span = config_.max_noun_phrases - config_.min_noun_phrases + 1;
  const int phrases = config_.min_noun_phrases + static_cast<int>(rng.uniform_index(span));
  for (int k = 0; k < phrases; ++k) {
    const auto noun = rng.uniform_index(src_nouns_.size());
    const auto number = rng.uniform_index(2);
    const auto poss = rng.uniform_index(4);
    const auto kase = rng.uniform_index(4);
    push_src(kSrcCase[kase]);
    push_src(poss == 0 ? kSrcDet[number] : kSrcPoss[poss][number]);
    push_src(src_nouns_[noun]);
    tgt.push_back(tgt_nouns_[noun] + kTgtNumber[number] + kTgtPoss[poss] + kTgtCase[kase]);
  }

  auto join = [](const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    return out;
  };
  return {join(src), join(tgt)};
}

corpus::ParallelCorpus generate_toy_corpus(std::size_t n, const ToyLanguageConfig& config,
                                           std::uint64_t seed) {
  const ToyLanguagePair language(config);
  Rng rng(seed);
  corpus::ParallelCorpus out{{}, kToySourceLang, kToyTargetLang};
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [src, tgt] = language.sample(rng);
    out.pairs.push_back({static_cast<std::int64_t>(i), std::move(src), std::move(tgt)});
  }
  return out;
}

corpus::ParallelCorpus generate_copy_corpus(std::size_t n, int vocab, int min_len, int max_len,
                                            std::uint64_t seed) {
  if (vocab < 1 || min_len < 1 || max_len < min_len) {
    throw Error(ErrorCode::kInvalidArgument, "invalid copy corpus parameters");
  }
  std::vector<std::string> words;
  for (int v = 0; v < vocab; ++v) {
    std::string w = "w";
    for (int x = v;; x /= 26) {
      w.push_back(static_cast<char>('a' + x % 26));
      if (x < 26) break;
    }
    words.push_back(w);
  }
  Rng rng(seed);
  corpus::ParallelCorpus out{{}, "src", "tgt"};
  for (std::size_t i = 0; i < n; ++i) {
    const int len = min_len + static_cast<int>(rng.uniform_index(max_len - min_len + 1));
    std::string s;
    for (int t = 0; t < len; ++t) s += (t ? " " : "") + words[rng.uniform_index(words.size())];
    out.pairs.push_back({static_cast<std::int64_t>(i), s, s});
  }
  return out;
}

}  // namespace lrmt::synthetic
