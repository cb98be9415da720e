// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "lrmt/error.hpp"
#include "lrmt/text.hpp"

namespace lrmt::bleu {
namespace {

using Ngram = std::vector<std::string_view>;

std::map<Ngram, std::int64_t> count_ngrams(const std::vector<std::string>& tokens, int n) {
  std::map<Ngram, std::int64_t> counts;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
    Ngram g(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + un));
    ++counts[g];
  }
  return counts;
}

}  // namespace

std::string BleuScore::format() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "BLEU = %.2f %.1f/%.1f/%.1f/%.1f (BP = %.3f, sys_len = %lld, ref_len = %lld)", score,
                precisions[0], precisions[1], precisions[2], precisions[3], bp,
                static_cast<long long>(sys_len), static_cast<long long>(ref_len));
  return buf;
}

std::vector<std::string> eval_tokenize(std::string_view input) {
  const std::u32string cps = text::decode_utf8(input);
  std::u32string spaced;
  spaced.reserve(cps.size() * 2);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (text::is_whitespace(c)) {
      spaced.push_back(U' ');
    } else if (text::is_letter(c) || text::is_digit(c)) {
      spaced.push_back(c);
    } else if ((c == U'.' || c == U',') && i > 0 && i + 1 < cps.size() &&
               text::is_digit(cps[i - 1]) && text::is_digit(cps[i + 1])) {
      spaced.push_back(c);
    } else {
      spaced.push_back(U' ');
      spaced.push_back(c);
      spaced.push_back(U' ');
    }
  }
  return text::split_words(text::encode_utf8(spaced));
}

SentenceStats sentence_stats(const std::vector<std::string>& hyp_tokens,
                             const std::vector<std::string>& ref_tokens) {
  SentenceStats stats;
  stats.sys_len = static_cast<std::int64_t>(hyp_tokens.size());
  stats.ref_len = static_cast<std::int64_t>(ref_tokens.size());
  for (int n = 1; n <= kMaxOrder; ++n) {
    const auto hyp = count_ngrams(hyp_tokens, n);
    const auto ref = count_ngrams(ref_tokens, n);
    for (const auto& [gram, count] : hyp) {
      stats.totals[n - 1] += count;
      auto it = ref.find(gram);
      if (it != ref.end()) stats.matches[n - 1] += std::min(count, it->second);
    }
  }
  return stats;
}

BleuScore score_from_stats(const SentenceStats& stats) {
  BleuScore out;
  out.sys_len = stats.sys_len;
  out.ref_len = stats.ref_len;
  out.matches = stats.matches;
  out.totals = stats.totals;
  if (stats.sys_len == 0) {
    out.bp = 0.0;  // undefined for an empty system output; the score is 0 anyway
  } else if (stats.sys_len > stats.ref_len) {
    out.bp = 1.0;
  } else {
    out.bp = std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.sys_len));
  }
  double smooth = 1.0;
  bool any_empty_order = false;
  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (stats.totals[n] == 0) {
      any_empty_order = true;
      out.precisions[n] = 0.0;
      continue;
    }
    double p;
    if (stats.matches[n] == 0) {
      smooth *= 2.0;
      p = 1.0 / (smooth * static_cast<double>(stats.totals[n]));
    } else {
      p = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    }
    out.precisions[n] = 100.0 * p;
    log_sum += std::log(p);
  }
  out.score = any_empty_order ? 0.0 : 100.0 * out.bp * std::exp(log_sum / kMaxOrder);
  return out;
}

BleuScore corpus_bleu(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references, bool lowercase) {
  if (hypotheses.size() != references.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(hypotheses.size()) + " hypotheses vs " +
                                                std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw Error(ErrorCode::kEmptyInput, "no sentences to score");
  SentenceStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = eval_tokenize(lowercase ? text::lowercase(hypotheses[i]) : hypotheses[i]);
    const auto ref = eval_tokenize(lowercase ? text::lowercase(references[i]) : references[i]);
    const auto s = sentence_stats(hyp, ref);
    total.sys_len += s.sys_len;
    total.ref_len += s.ref_len;
    for (int n = 0; n < kMaxOrder; ++n) {
      total.matches[n] += s.matches[n];
      total.totals[n] += s.totals[n];
    }
  }
  return score_from_stats(total);
}

}  // namespace lrmt::bleu
