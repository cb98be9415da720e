// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrmt/error.hpp"

namespace lrmt::decoding {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool emittable(TokenId id) { return id != subword::kPadId && id != subword::kBosId; }

double normalized(double log_prob, std::size_t length, double alpha) {
  if (alpha == 0.0) return log_prob;
  return log_prob / std::pow(static_cast<double>(std::max<std::size_t>(length, 1)), alpha);
}

}  // namespace

void DecodeConfig::validate() const {
  if (beam_size < 1) throw Error(ErrorCode::kInvalidArgument, "beam_size must be >= 1");
  if (!(length_penalty_alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "length penalty must be >= 0");
  }
}

NmtScorer::NmtScorer(const model::Parameters& params, const std::vector<TokenId>& src_ids)
    : params_(params), enc_(model::encode_sequence(params, src_ids)) {}

std::any NmtScorer::initial_state() const {
  return model::DecoderState{enc_.final_h, enc_.final_c};
}

std::pair<Eigen::VectorXd, std::any> NmtScorer::step(const std::any& state, TokenId prev) const {
  auto out = model::decoder_step(params_, enc_, prev, std::any_cast<const model::DecoderState&>(state));
  return {std::move(out.log_probs), std::move(out.state)};
}

Hypothesis greedy_search(const StepScorer& scorer, std::size_t max_len) {
  Hypothesis hyp;
  std::any state = scorer.initial_state();
  TokenId prev = subword::kBosId;
  while (hyp.tokens.size() < max_len) {
    auto [log_probs, next_state] = scorer.step(state, prev);
    TokenId best = -1;
    double best_lp = kNegInf;
    for (Eigen::Index v = 0; v < log_probs.size(); ++v) {
      const auto id = static_cast<TokenId>(v);
      if (emittable(id) && (best < 0 || log_probs(v) > best_lp)) {
        best = id;
        best_lp = log_probs(v);
      }
    }
    hyp.log_prob += best_lp;
    if (best == subword::kEosId) {
      hyp.finished = true;
      break;
    }
    hyp.tokens.push_back(best);
    state = std::move(next_state);
    prev = best;
  }
  return hyp;
}

Hypothesis beam_search(const StepScorer& scorer, std::size_t max_len, const DecodeConfig& config) {
  config.validate();
  const double alpha = config.length_penalty_alpha;
  const auto beam = static_cast<std::size_t>(config.beam_size);

  struct Live {
    std::vector<TokenId> tokens;
    double log_prob;
    std::any state;
  };
  struct Candidate {
    std::size_t parent;
    TokenId token;
    double log_prob;
    double score;
  };

  std::vector<Live> live{{{}, 0.0, scorer.initial_state()}};
  std::vector<Hypothesis> finished;
  std::vector<double> finished_scores;
  bool stopped = false;

  for (std::size_t len = 0; len < max_len && !live.empty(); ++len) {
    std::vector<Candidate> candidates;
    std::vector<std::any> next_states(live.size());
    for (std::size_t p = 0; p < live.size(); ++p) {
      const TokenId prev = live[p].tokens.empty() ? subword::kBosId : live[p].tokens.back();
      auto [log_probs, next_state] = scorer.step(live[p].state, prev);
      next_states[p] = std::move(next_state);
      for (Eigen::Index v = 0; v < log_probs.size(); ++v) {
        const auto id = static_cast<TokenId>(v);
        if (!emittable(id)) continue;
        const double lp = live[p].log_prob + log_probs(v);
        candidates.push_back({p, id, lp, normalized(lp, len + 1, alpha)});
      }
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next_live;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = candidates[k];
      if (c.token == subword::kEosId) {
        finished.push_back({live[c.parent].tokens, c.log_prob, true});
        finished_scores.push_back(c.score);
      } else {
        auto tokens = live[c.parent].tokens;
        tokens.push_back(c.token);
        next_live.push_back({std::move(tokens), c.log_prob, next_states[c.parent]});
      }
    }
    live = std::move(next_live);
    if (!finished.empty() && !live.empty()) {
      const double best_finished = *std::max_element(finished_scores.begin(), finished_scores.end());
      if (alpha == 0.0) {
        // Live scores can only fall, so nothing live can overtake.
        double best_live = kNegInf;
        for (const auto& l : live) best_live = std::max(best_live, l.log_prob);
        if (best_finished >= best_live) {
          stopped = true;
          break;
        }
      } else if (finished.size() >= beam) {
        stopped = true;
        break;
      }
    }
  }

  // Hypotheses cut off by the length cap compete with the finished ones.
  Hypothesis best;
  double best_score = kNegInf;
  bool have = false;
  for (std::size_t i = 0; i < finished.size(); ++i) {
    if (!have || finished_scores[i] > best_score) {
      best = finished[i];
      best_score = finished_scores[i];
      have = true;
    }
  }
  for (const auto& l : live) {
    if (stopped && have) break;
    const double score = normalized(l.log_prob, l.tokens.size(), alpha);
    if (!have || score > best_score) {
      best = {l.tokens, l.log_prob, false};
      best_score = score;
      have = true;
    }
  }
  return best;
}

std::vector<TokenId> greedy_decode(const model::Parameters& params,
                                   const std::vector<TokenId>& src_ids, const DecodeConfig&) {
  if (src_ids.empty()) throw Error(ErrorCode::kEmptySource, "empty source");
  NmtScorer scorer(params, src_ids);
  return greedy_search(scorer, max_output_length(src_ids.size())).tokens;
}

std::vector<TokenId> beam_decode(const model::Parameters& params,
                                 const std::vector<TokenId>& src_ids, const DecodeConfig& config) {
  if (src_ids.empty()) throw Error(ErrorCode::kEmptySource, "empty source");
  NmtScorer scorer(params, src_ids);
  return beam_search(scorer, max_output_length(src_ids.size()), config).tokens;
}

std::vector<TokenId> decode(const model::Parameters& params, const std::vector<TokenId>& src_ids,
                            const DecodeConfig& config) {
  config.validate();
  return config.beam_size == 1 ? greedy_decode(params, src_ids, config)
                               : beam_decode(params, src_ids, config);
}

std::vector<std::string> translate_lines(const model::Parameters& params,
                                         const subword::BpeModel& src_model,
                                         const subword::BpeModel& tgt_model,
                                         const std::vector<std::string>& lines,
                                         const DecodeConfig& config) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& ids : subword::encode_lines(src_model, lines)) {
    if (ids.empty()) {
      out.emplace_back();
      continue;
    }
    out.push_back(subword::decode(tgt_model, decode(params, ids, config)));
  }
  return out;
}

}  // namespace lrmt::decoding
