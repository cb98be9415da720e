// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lrmt::bleu {

inline constexpr int kMaxOrder = 4;

struct BleuScore {
  double score = 0.0;                       // 0..100
  std::array<double, kMaxOrder> precisions{};  // percent, after smoothing
  double bp = 0.0;
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;
  std::array<std::int64_t, kMaxOrder> matches{};
  std::array<std::int64_t, kMaxOrder> totals{};

  // `BLEU = 57.89 100.0/75.0/66.7/50.0 (BP = 0.819, sys_len = 5, ref_len = 6)`
  std::string format() const;
};

// Language-independent evaluation tokenization: every character that is not
// a letter, digit or space becomes its own token, except '.' and ',' between
// two digits.
std::vector<std::string> eval_tokenize(std::string_view text);

struct SentenceStats {
  std::array<std::int64_t, kMaxOrder> matches{};
  std::array<std::int64_t, kMaxOrder> totals{};
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;
};

SentenceStats sentence_stats(const std::vector<std::string>& hyp_tokens,
                             const std::vector<std::string>& ref_tokens);

// Score from summed statistics, with exponential smoothing of zero counts.
BleuScore score_from_stats(const SentenceStats& stats);

BleuScore corpus_bleu(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references, bool lowercase = false);

}  // namespace lrmt::bleu
