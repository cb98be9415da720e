// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <any>
#include <string>
#include <utility>
#include <vector>

#include "lrmt/model.hpp"
#include "lrmt/subword.hpp"

namespace lrmt::decoding {

using subword::TokenId;

struct DecodeConfig {
  int beam_size = 1;  // 1 = greedy
  double length_penalty_alpha = 0.0;

  void validate() const;
};

// Output length cap for a source of `src_len` tokens.
inline std::size_t max_output_length(std::size_t src_len) { return 2 * src_len + 10; }

// Next-token distribution over target ids given an opaque decoder state.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::any initial_state() const = 0;
  // Log-probabilities for the token after `prev`, and the state after
  // consuming `prev`.
  virtual std::pair<Eigen::VectorXd, std::any> step(const std::any& state, TokenId prev) const = 0;
};

class NmtScorer : public StepScorer {
 public:
  NmtScorer(const model::Parameters& params, const std::vector<TokenId>& src_ids);

  std::any initial_state() const override;
  std::pair<Eigen::VectorXd, std::any> step(const std::any& state, TokenId prev) const override;

 private:
  const model::Parameters& params_;
  model::EncoderStates enc_;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // excludes bos/eos
  double log_prob = 0.0;        // includes the eos step when finished
  bool finished = false;
};

Hypothesis greedy_search(const StepScorer& scorer, std::size_t max_len);
Hypothesis beam_search(const StepScorer& scorer, std::size_t max_len, const DecodeConfig& config);

std::vector<TokenId> greedy_decode(const model::Parameters& params,
                                   const std::vector<TokenId>& src_ids,
                                   const DecodeConfig& config = {});
std::vector<TokenId> beam_decode(const model::Parameters& params,
                                 const std::vector<TokenId>& src_ids, const DecodeConfig& config);
// Greedy when beam_size == 1, beam search otherwise.
std::vector<TokenId> decode(const model::Parameters& params, const std::vector<TokenId>& src_ids,
                            const DecodeConfig& config);

// Encodes each line with `src_model`, decodes, and detokenizes with
// `tgt_model`. Lines that encode to nothing translate to "".
std::vector<std::string> translate_lines(const model::Parameters& params,
                                         const subword::BpeModel& src_model,
                                         const subword::BpeModel& tgt_model,
                                         const std::vector<std::string>& lines,
                                         const DecodeConfig& config);

}  // namespace lrmt::decoding
