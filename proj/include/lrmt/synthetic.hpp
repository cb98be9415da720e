// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrmt/corpus.hpp"
#include "lrmt/rng.hpp"

namespace lrmt::synthetic {

// A toy language pair standing in for real data. The source side is analytic
// (separate words for number, possession, case, person and tense); the target
// side is agglutinative (one stem plus a suffix chain per phrase), so target
// word forms are combinatorially many while their pieces are few.
struct ToyLanguageConfig {
  int noun_stems = 80;
  int verb_stems = 30;
  int min_noun_phrases = 1;
  int max_noun_phrases = 3;
  std::uint64_t lexicon_seed = 7;
};

class ToyLanguagePair {
 public:
  explicit ToyLanguagePair(const ToyLanguageConfig& config = {});

  // One sentence pair (source, target) drawn from `rng`.
  std::pair<std::string, std::string> sample(Rng& rng) const;

  const std::vector<std::string>& source_nouns() const { return src_nouns_; }
  const std::vector<std::string>& target_nouns() const { return tgt_nouns_; }

 private:
  ToyLanguageConfig config_;
  std::vector<std::string> src_nouns_, tgt_nouns_;
  std::vector<std::string> src_verbs_, tgt_verbs_;
};

inline constexpr const char* kToySourceLang = "fr";
inline constexpr const char* kToyTargetLang = "wo";

corpus::ParallelCorpus generate_toy_corpus(std::size_t n, const ToyLanguageConfig& config,
                                           std::uint64_t seed);

// Source == target; tokens drawn uniformly from `vocab` distinct words.
corpus::ParallelCorpus generate_copy_corpus(std::size_t n, int vocab, int min_len, int max_len,
                                            std::uint64_t seed);

}  // namespace lrmt::synthetic
