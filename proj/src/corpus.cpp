// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "lrmt/config.hpp"
#include "lrmt/error.hpp"
#include "lrmt/rng.hpp"
#include "lrmt/text.hpp"

namespace lrmt::corpus {
namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::is_valid_utf8(line)) {
      throw Error(ErrorCode::kEncodingError,
                  path.string() + ": line " + std::to_string(lines.size() + 1) + " is not UTF-8");
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& l : lines) {
    content += l;
    content += '\n';
  }
  write_file_atomic(path, content);
}

bool is_scheme_char(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' ||
         c == '-' || c == '.';
}

bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char32_t ascii_lower(char32_t c) { return (c >= 'A' && c <= 'Z') ? c + 32 : c; }

// Returns the end of a URL starting at i, or i when none starts there.
std::size_t url_end(const std::u32string& s, std::size_t i) {
  const std::size_t n = s.size();
  auto nonspace_run = [&](std::size_t from) {
    std::size_t j = from;
    while (j < n && !text::is_whitespace(s[j])) ++j;
    return j;
  };
  if (i + 4 < n && ascii_lower(s[i]) == 'w' && ascii_lower(s[i + 1]) == 'w' &&
      ascii_lower(s[i + 2]) == 'w' && s[i + 3] == '.' && !text::is_whitespace(s[i + 4])) {
    return nonspace_run(i + 4);
  }
  if (!is_ascii_alpha(s[i]) || (i > 0 && is_scheme_char(s[i - 1]))) return i;
  std::size_t k = i;
  while (k < n && is_scheme_char(s[k])) ++k;
  if (k + 3 < n && s[k] == ':' && s[k + 1] == '/' && s[k + 2] == '/' &&
      !text::is_whitespace(s[k + 3])) {
    return nonspace_run(k + 3);
  }
  return i;
}

std::map<std::u32string, double> ngram_counts(const std::u32string& cps, int order) {
  std::map<std::u32string, double> counts;
  if (static_cast<int>(cps.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= cps.size(); ++i) counts[cps.substr(i, order)] += 1.0;
  return counts;
}

}  // namespace

std::vector<std::int64_t> ParallelCorpus::ids() const {
  std::vector<std::int64_t> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.id);
  return out;
}

std::vector<std::string> ParallelCorpus::source_lines() const {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.source_text);
  return out;
}

std::vector<std::string> ParallelCorpus::target_lines() const {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.target_text);
  return out;
}

bool FilterReport::reconciles() const {
  return input_count == retained + emptied_removed + same_language_removed +
                            identical_sides_removed + duplicate_removed + overlong_removed;
}

std::string FilterReport::to_key_value() const {
  std::ostringstream out;
  out << "input_count=" << input_count << "\n"
      << "normalized_modified=" << normalized_modified << "\n"
      << "emptied_removed=" << emptied_removed << "\n"
      << "same_language_removed=" << same_language_removed << "\n"
      << "identical_sides_removed=" << identical_sides_removed << "\n"
      << "duplicate_removed=" << duplicate_removed << "\n"
      << "overlong_removed=" << overlong_removed << "\n"
      << "retained=" << retained << "\n";
  return out.str();
}

ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             const std::string& source_lang, const std::string& target_lang) {
  if (source_lang.empty() || target_lang.empty() || source_lang == target_lang) {
    throw Error(ErrorCode::kInvalidArgument, "language tags must be non-empty and distinct");
  }
  auto src = read_lines(source_path);
  auto tgt = read_lines(target_path);
  if (src.size() != tgt.size()) {
    throw Error(ErrorCode::kLineCountMismatch, source_path.string() + " has " +
                                                   std::to_string(src.size()) + " lines, " +
                                                   target_path.string() + " has " +
                                                   std::to_string(tgt.size()));
  }
  ParallelCorpus corpus{{}, source_lang, target_lang};
  corpus.pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    corpus.pairs.push_back({static_cast<std::int64_t>(i), std::move(src[i]), std::move(tgt[i])});
  }
  return corpus;
}

void save_parallel(const ParallelCorpus& corpus, const std::filesystem::path& prefix) {
  write_lines(prefix.string() + ".src", corpus.source_lines());
  write_lines(prefix.string() + ".tgt", corpus.target_lines());
  std::vector<std::string> ids;
  for (auto id : corpus.ids()) ids.push_back(std::to_string(id));
  write_lines(prefix.string() + ".ids", ids);
}

ParallelCorpus load_saved(const std::filesystem::path& prefix, const std::string& source_lang,
                          const std::string& target_lang) {
  auto corpus =
      load_parallel(prefix.string() + ".src", prefix.string() + ".tgt", source_lang, target_lang);
  const std::filesystem::path ids_path = prefix.string() + ".ids";
  if (std::filesystem::exists(ids_path)) {
    auto ids = read_lines(ids_path);
    if (ids.size() != corpus.size()) {
      throw Error(ErrorCode::kLineCountMismatch, ids_path.string() + " does not match corpus");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) corpus.pairs[i].id = std::stoll(ids[i]);
  }
  return corpus;
}

std::string normalize_text(const std::string& input) {
  std::u32string cps = text::decode_utf8(input);
  std::erase_if(cps, [](char32_t c) { return c != U'\t' && text::is_control(c); });
  std::u32string kept;
  kept.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size();) {
    const std::size_t end = url_end(cps, i);
    if (end > i) {
      i = end;
    } else {
      kept.push_back(cps[i]);
      ++i;
    }
  }
  return text::normalize_spaces(text::encode_utf8(kept));
}

SentencePair normalize_pair(const SentencePair& pair) {
  return {pair.id, normalize_text(pair.source_text), normalize_text(pair.target_text)};
}

LanguageProfile build_profile(const std::string& lang_tag, const std::vector<std::string>& lines,
                              int ngram_order) {
  if (ngram_order < 1) throw Error(ErrorCode::kInvalidArgument, "ngram_order must be >= 1");
  LanguageProfile profile{lang_tag, ngram_order, {}};
  double total = 0.0;
  for (const auto& line : lines) {
    for (const auto& [gram, count] : ngram_counts(text::decode_utf8(line), ngram_order)) {
      profile.freqs[gram] += count;
      total += count;
    }
  }
  if (total > 0.0) {
    for (auto& [gram, value] : profile.freqs) value /= total;
  }
  return profile;
}

double profile_similarity(const LanguageProfile& profile, const std::string& text_in) {
  const auto counts = ngram_counts(text::decode_utf8(text_in), profile.ngram_order);
  if (counts.empty() || profile.freqs.empty()) return 0.0;
  double dot = 0.0;
  double norm_text = 0.0;
  for (const auto& [gram, c] : counts) {
    norm_text += c * c;
    auto it = profile.freqs.find(gram);
    if (it != profile.freqs.end()) dot += c * it->second;
  }
  double norm_profile = 0.0;
  for (const auto& [gram, f] : profile.freqs) norm_profile += f * f;
  if (norm_profile == 0.0) return 0.0;
  return dot / (std::sqrt(norm_text) * std::sqrt(norm_profile));
}

std::string classify_language(const std::string& text_in,
                              const std::vector<LanguageProfile>& profiles, double threshold) {
  if (profiles.empty()) throw Error(ErrorCode::kEmptyProfiles, "no language profiles given");
  std::string best;
  double best_sim = -1.0;
  for (const auto& p : profiles) {
    const double sim = profile_similarity(p, text_in);
    if (sim > best_sim) {
      best_sim = sim;
      best = p.lang_tag;
    }
  }
  if (best_sim < threshold || best_sim <= 0.0) return "";
  return best;
}

bool same_language(const SentencePair& pair, const std::vector<LanguageProfile>& profiles,
                   double threshold) {
  const std::string src = classify_language(pair.source_text, profiles, threshold);
  if (src.empty()) return false;
  return src == classify_language(pair.target_text, profiles, threshold);
}

std::pair<ParallelCorpus, FilterReport> filter_corpus(const ParallelCorpus& corpus,
                                                      const std::vector<LanguageProfile>& profiles,
                                                      double threshold) {
  if (profiles.empty()) throw Error(ErrorCode::kEmptyProfiles, "no language profiles given");
  FilterReport report;
  report.input_count = static_cast<std::int64_t>(corpus.size());

  std::vector<SentencePair> survivors;
  survivors.reserve(corpus.size());
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& raw : corpus.pairs) {
    SentencePair pair = normalize_pair(raw);
    if (pair.source_text != raw.source_text || pair.target_text != raw.target_text) {
      ++report.normalized_modified;
    }
    if (pair.source_text.empty() || pair.target_text.empty()) {
      ++report.emptied_removed;
      continue;
    }
    if (same_language(pair, profiles, threshold)) {
      ++report.same_language_removed;
      continue;
    }
    if (pair.source_text == pair.target_text) {
      ++report.identical_sides_removed;
      continue;
    }
    if (!seen.emplace(pair.source_text, pair.target_text).second) {
      ++report.duplicate_removed;
      continue;
    }
    survivors.push_back(std::move(pair));
  }

  // Overlong removal is repeated until stable so that filtering the output
  // again removes nothing.
  while (!survivors.empty()) {
    std::vector<std::size_t> src_len, tgt_len;
    double src_sum = 0.0, tgt_sum = 0.0;
    for (const auto& p : survivors) {
      src_len.push_back(text::word_count(p.source_text));
      tgt_len.push_back(text::word_count(p.target_text));
      src_sum += static_cast<double>(src_len.back());
      tgt_sum += static_cast<double>(tgt_len.back());
    }
    const double n = static_cast<double>(survivors.size());
    const double src_limit = 2.0 * src_sum / n;
    const double tgt_limit = 2.0 * tgt_sum / n;
    std::vector<SentencePair> kept;
    kept.reserve(survivors.size());
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      if (static_cast<double>(src_len[i]) > src_limit ||
          static_cast<double>(tgt_len[i]) > tgt_limit) {
        ++report.overlong_removed;
      } else {
        kept.push_back(std::move(survivors[i]));
      }
    }
    const bool changed = kept.size() != survivors.size();
    survivors = std::move(kept);
    if (!changed) break;
  }

  report.retained = static_cast<std::int64_t>(survivors.size());
  return {ParallelCorpus{std::move(survivors), corpus.source_lang, corpus.target_lang}, report};
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& weights) {
  const std::size_t weight_sum = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  std::vector<std::size_t> out(weights.size(), 0);
  if (weight_sum == 0) return out;
  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder, index)
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const unsigned __int128 scaled = static_cast<unsigned __int128>(total) * weights[k];
    out[k] = static_cast<std::size_t>(scaled / weight_sum);
    remainders.emplace_back(static_cast<std::size_t>(scaled % weight_sum), k);
    assigned += out[k];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
    ++out[remainders[r].second];
  }
  return out;
}

std::vector<int> length_strata(const ParallelCorpus& corpus) {
  const std::size_t n = corpus.size();
  std::vector<std::size_t> lengths(n);
  for (std::size_t i = 0; i < n; ++i) lengths[i] = text::word_count(corpus.pairs[i].source_text);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
    return corpus.pairs[a].id < corpus.pairs[b].id;
  });
  std::vector<int> strata(n, 0);
  for (std::size_t rank = 0; rank < n; ++rank) {
    strata[order[rank]] = static_cast<int>(rank * kNumStrata / n);
  }
  return strata;
}

DataSplits stratified_split(const ParallelCorpus& corpus, std::size_t valid_size,
                            std::size_t test_size, std::uint64_t seed) {
  if (valid_size + test_size >= corpus.size()) {
    throw Error(ErrorCode::kSizesExceedCorpus,
                "valid " + std::to_string(valid_size) + " + test " + std::to_string(test_size) +
                    " must be below corpus size " + std::to_string(corpus.size()));
  }
  const auto strata = length_strata(corpus);
  std::vector<std::vector<std::size_t>> members(kNumStrata);
  for (std::size_t i = 0; i < corpus.size(); ++i) members[strata[i]].push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());

  auto valid_quota = apportion(valid_size, sizes);
  auto test_quota = apportion(test_size, sizes);
  // Tiny strata can be over-allocated; move the excess test quota to the
  // stratum with the most spare room.
  for (int k = 0; k < kNumStrata; ++k) {
    while (valid_quota[k] + test_quota[k] > sizes[k]) {
      --test_quota[k];
      int best = -1;
      std::size_t best_spare = 0;
      for (int j = 0; j < kNumStrata; ++j) {
        const std::size_t spare = sizes[j] - valid_quota[j] - test_quota[j];
        if (spare > best_spare) {
          best_spare = spare;
          best = j;
        }
      }
      ++test_quota[best];
    }
  }

  Rng rng(seed);
  std::vector<char> taken(corpus.size(), 0);
  std::vector<std::size_t> valid_idx, test_idx;
  for (int k = 0; k < kNumStrata; ++k) {
    auto& m = members[k];
    rng.shuffle(std::span<std::size_t>(m));
    for (std::size_t r = 0; r < valid_quota[k]; ++r) valid_idx.push_back(m[r]);
    for (std::size_t r = valid_quota[k]; r < valid_quota[k] + test_quota[k]; ++r) {
      test_idx.push_back(m[r]);
    }
  }
  std::sort(valid_idx.begin(), valid_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  DataSplits splits;
  for (auto* part : {&splits.valid, &splits.test, &splits.train_pool}) {
    part->source_lang = corpus.source_lang;
    part->target_lang = corpus.target_lang;
  }
  for (auto i : valid_idx) {
    splits.valid.pairs.push_back(corpus.pairs[i]);
    taken[i] = 1;
  }
  for (auto i : test_idx) {
    splits.test.pairs.push_back(corpus.pairs[i]);
    taken[i] = 1;
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!taken[i]) splits.train_pool.pairs.push_back(corpus.pairs[i]);
  }
  return splits;
}

std::vector<ParallelCorpus> nested_subsets(const ParallelCorpus& train_pool,
                                           const std::vector<std::size_t>& sizes,
                                           std::uint64_t seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw Error(ErrorCode::kInvalidArgument, "subset sizes must be ascending");
  }
  if (!sizes.empty() && sizes.back() > train_pool.size()) {
    throw Error(ErrorCode::kSizeExceedsPool, "size " + std::to_string(sizes.back()) +
                                                 " exceeds pool of " +
                                                 std::to_string(train_pool.size()));
  }
  std::vector<SentencePair> shuffled = train_pool.pairs;
  Rng rng(seed);
  rng.shuffle(std::span<SentencePair>(shuffled));
  std::vector<ParallelCorpus> out;
  out.reserve(sizes.size());
  for (auto k : sizes) {
    out.push_back(ParallelCorpus{{shuffled.begin(), shuffled.begin() + static_cast<long>(k)},
                                 train_pool.source_lang,
                                 train_pool.target_lang});
  }
  return out;
}

}  // namespace lrmt::corpus
