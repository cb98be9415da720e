// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lrmt::subword {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr int kNumReserved = 4;

inline constexpr std::string_view kPadPiece = "<pad>";
inline constexpr std::string_view kUnkPiece = "<unk>";
inline constexpr std::string_view kBosPiece = "<s>";
inline constexpr std::string_view kEosPiece = "</s>";

// U+2581 LOWER ONE EIGHTH BLOCK, prepended to every word.
inline constexpr std::string_view kBoundaryMarker = "\xE2\x96\x81";

enum class VocabMode { kWord, kBpe };

std::string_view mode_name(VocabMode mode);

// Bijection between pieces and contiguous ids; ids 0..3 are reserved.
class Vocabulary {
 public:
  explicit Vocabulary(VocabMode mode = VocabMode::kWord);

  // Returns the id of `piece`, adding it when new.
  TokenId add(const std::string& piece);
  TokenId id_of(const std::string& piece) const;  // kUnkId when absent
  bool contains(const std::string& piece) const { return piece_to_id_.count(piece) != 0; }
  const std::string& piece(TokenId id) const;  // throws kUnknownId
  std::size_t size() const { return id_to_piece_.size(); }
  VocabMode mode() const { return mode_; }
  const std::vector<std::string>& pieces() const { return id_to_piece_; }

  bool operator==(const Vocabulary& other) const {
    return mode_ == other.mode_ && id_to_piece_ == other.id_to_piece_;
  }

 private:
  VocabMode mode_;
  std::map<std::string, TokenId> piece_to_id_;
  std::vector<std::string> id_to_piece_;
};

class BpeModel {
 public:
  BpeModel() = default;
  BpeModel(Vocabulary vocab, std::vector<std::pair<std::string, std::string>> merges);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  VocabMode mode() const { return vocab_.mode(); }

  // Merge rank of (left, right), or -1.
  int merge_rank(const std::string& left, const std::string& right) const;

  // Segments one whitespace-free word into pieces (BPE mode: with the
  // boundary marker; word mode: the word itself).
  std::vector<std::string> segment_word(const std::string& word) const;

  bool operator==(const BpeModel& other) const {
    return vocab_ == other.vocab_ && merges_ == other.merges_;
  }

 private:
  Vocabulary vocab_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, int> ranks_;
};

inline constexpr std::size_t kDefaultBpeVocabSize = 8000;

BpeModel train_bpe(const std::vector<std::string>& lines, std::size_t vocab_size,
                   std::size_t min_pair_freq = 2);

// Word-level model: no merges, pieces are whole words.
Vocabulary build_word_vocab(const std::vector<std::string>& lines, std::size_t max_size,
                            std::size_t min_freq = 1);
BpeModel word_model(Vocabulary vocab);

std::vector<TokenId> encode(const BpeModel& model, std::string_view text);
// Encodes many lines, reusing per-word segmentations.
std::vector<std::vector<TokenId>> encode_lines(const BpeModel& model,
                                               const std::vector<std::string>& lines);
std::vector<std::string> encode_pieces(const BpeModel& model, std::string_view text);
// Skips pad/bos/eos. Throws kUnknownId for ids outside the vocabulary.
std::string decode(const BpeModel& model, const std::vector<TokenId>& ids);

inline constexpr int kModelFormatVersion = 1;

void save_model(const BpeModel& model, const std::filesystem::path& path);
BpeModel load_model(const std::filesystem::path& path);
std::string serialize_model(const BpeModel& model);
BpeModel parse_model(const std::string& content);

}  // namespace lrmt::subword
