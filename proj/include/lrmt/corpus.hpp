// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lrmt::corpus {

struct SentencePair {
  std::int64_t id = 0;
  std::string source_text;
  std::string target_text;

  bool operator==(const SentencePair&) const = default;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::string source_lang;
  std::string target_lang;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::vector<std::int64_t> ids() const;
  std::vector<std::string> source_lines() const;
  std::vector<std::string> target_lines() const;
};

// Character n-gram frequency profile of one language.
struct LanguageProfile {
  std::string lang_tag;
  int ngram_order = 3;
  std::map<std::u32string, double> freqs;
};

LanguageProfile build_profile(const std::string& lang_tag, const std::vector<std::string>& lines,
                              int ngram_order = 3);

// Cosine similarity between the n-gram counts of `text` and the profile. Zero
// when the text is shorter than the profile order.
double profile_similarity(const LanguageProfile& profile, const std::string& text);

inline constexpr double kDefaultSameLanguageThreshold = 0.15;

struct FilterReport {
  std::int64_t input_count = 0;
  std::int64_t normalized_modified = 0;
  std::int64_t emptied_removed = 0;
  std::int64_t same_language_removed = 0;
  std::int64_t identical_sides_removed = 0;
  std::int64_t duplicate_removed = 0;
  std::int64_t overlong_removed = 0;
  std::int64_t retained = 0;

  bool operator==(const FilterReport&) const = default;
  bool reconciles() const;
  // Flat key=value text, one field per line.
  std::string to_key_value() const;
};

struct DataSplits {
  ParallelCorpus valid;
  ParallelCorpus test;
  ParallelCorpus train_pool;
};

// Reads two aligned UTF-8 files, one sentence per line. A trailing newline at
// end of file does not start a new line; '\r' before '\n' is dropped.
ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             const std::string& source_lang, const std::string& target_lang);

// Writes `<prefix>.src`, `<prefix>.tgt` and `<prefix>.ids`.
void save_parallel(const ParallelCorpus& corpus, const std::filesystem::path& prefix);
// Inverse of save_parallel; ids come from the .ids file when present.
ParallelCorpus load_saved(const std::filesystem::path& prefix, const std::string& source_lang,
                          const std::string& target_lang);

std::string normalize_text(const std::string& text);
SentencePair normalize_pair(const SentencePair& pair);

// Returns the tag of the best-matching profile, or "" when the text is shorter
// than the profile order or no profile reaches the threshold.
std::string classify_language(const std::string& text, const std::vector<LanguageProfile>& profiles,
                              double threshold);

bool same_language(const SentencePair& pair, const std::vector<LanguageProfile>& profiles,
                   double threshold = kDefaultSameLanguageThreshold);

std::pair<ParallelCorpus, FilterReport> filter_corpus(
    const ParallelCorpus& corpus, const std::vector<LanguageProfile>& profiles,
    double threshold = kDefaultSameLanguageThreshold);

inline constexpr int kNumStrata = 10;

// Stratum (0..9) of each pair: equal-frequency deciles of the source word
// count, ranks broken by id.
std::vector<int> length_strata(const ParallelCorpus& corpus);

DataSplits stratified_split(const ParallelCorpus& corpus, std::size_t valid_size,
                            std::size_t test_size, std::uint64_t seed);

std::vector<ParallelCorpus> nested_subsets(const ParallelCorpus& train_pool,
                                           const std::vector<std::size_t>& sizes,
                                           std::uint64_t seed);

// Largest-remainder apportionment of `total` over `weights`; ties favor the
// lower index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& weights);

}  // namespace lrmt::corpus
