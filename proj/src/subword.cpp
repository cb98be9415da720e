// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/subword.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lrmt/config.hpp"
#include "lrmt/error.hpp"
#include "lrmt/text.hpp"

namespace lrmt::subword {
namespace {

using Symbols = std::vector<std::string>;
using SymbolPair = std::pair<std::string, std::string>;

Symbols initial_symbols(const std::string& word) {
  Symbols symbols{std::string(kBoundaryMarker)};
  for (char32_t cp : text::decode_utf8(word)) symbols.push_back(text::encode_utf8(cp));
  return symbols;
}

// Merges every non-overlapping occurrence of (left, right), scanning left to
// right. Returns whether anything changed.
bool apply_merge(Symbols& symbols, const std::string& left, const std::string& right) {
  if (symbols.size() < 2) return false;
  Symbols out;
  out.reserve(symbols.size());
  bool changed = false;
  for (std::size_t i = 0; i < symbols.size();) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
      changed = true;
    } else {
      out.push_back(std::move(symbols[i]));
      ++i;
    }
  }
  symbols = std::move(out);
  return changed;
}

std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \r") - b + 1);
}

}  // namespace

std::string_view mode_name(VocabMode mode) { return mode == VocabMode::kBpe ? "bpe" : "word"; }

Vocabulary::Vocabulary(VocabMode mode) : mode_(mode) {
  for (auto p : {kPadPiece, kUnkPiece, kBosPiece, kEosPiece}) add(std::string(p));
}

TokenId Vocabulary::add(const std::string& piece) {
  auto [it, inserted] = piece_to_id_.emplace(piece, static_cast<TokenId>(id_to_piece_.size()));
  if (inserted) id_to_piece_.push_back(piece);
  return it->second;
}

TokenId Vocabulary::id_of(const std::string& piece) const {
  auto it = piece_to_id_.find(piece);
  return it == piece_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::piece(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_piece_.size()) {
    throw Error(ErrorCode::kUnknownId, "token id " + std::to_string(id) + " outside vocabulary of " +
                                           std::to_string(id_to_piece_.size()));
  }
  return id_to_piece_[static_cast<std::size_t>(id)];
}

BpeModel::BpeModel(Vocabulary vocab, std::vector<std::pair<std::string, std::string>> merges)
    : vocab_(std::move(vocab)), merges_(std::move(merges)) {
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    ranks_.emplace(merges_[r], static_cast<int>(r));
  }
}

int BpeModel::merge_rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find({left, right});
  return it == ranks_.end() ? -1 : it->second;
}

std::vector<std::string> BpeModel::segment_word(const std::string& word) const {
  if (mode() == VocabMode::kWord) return {word};
  Symbols symbols = initial_symbols(word);
  // Replays merges in learned order: each round applies the lowest-ranked merge
  // present whose rank exceeds the previously applied one.
  int last_rank = -1;
  while (symbols.size() > 1) {
    int best = -1;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const int r = merge_rank(symbols[i], symbols[i + 1]);
      if (r > last_rank && (best < 0 || r < best)) best = r;
    }
    if (best < 0) break;
    const auto& [left, right] = merges_[static_cast<std::size_t>(best)];
    apply_merge(symbols, left, right);
    last_rank = best;
  }
  return symbols;
}

BpeModel train_bpe(const std::vector<std::string>& lines, std::size_t vocab_size,
                   std::size_t min_pair_freq) {
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "no training lines");
  std::map<std::string, std::int64_t> word_freq;
  for (const auto& line : lines) {
    for (auto& w : text::split_words(line)) ++word_freq[w];
  }
  if (word_freq.empty()) throw Error(ErrorCode::kEmptyInput, "training lines contain no words");

  std::vector<Symbols> words;
  std::vector<std::int64_t> freqs;
  std::set<std::string> chars;
  for (const auto& [w, f] : word_freq) {
    words.push_back(initial_symbols(w));
    freqs.push_back(f);
    chars.insert(words.back().begin(), words.back().end());
  }
  if (vocab_size <= chars.size() + kNumReserved) {
    throw Error(ErrorCode::kVocabTooSmall, "vocab_size " + std::to_string(vocab_size) +
                                               " must exceed " +
                                               std::to_string(chars.size() + kNumReserved));
  }

  Vocabulary vocab(VocabMode::kBpe);
  for (const auto& c : chars) vocab.add(c);

  std::map<SymbolPair, std::int64_t> counts;
  std::map<SymbolPair, std::set<std::size_t>> where;
  auto account = [&](std::size_t w, std::int64_t sign) {
    const auto& s = words[w];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      SymbolPair p{s[i], s[i + 1]};
      auto it = counts.find(p);
      if (sign > 0) {
        counts[p] += freqs[w];
        where[p].insert(w);
      } else if (it != counts.end()) {
        it->second -= freqs[w];
        if (it->second <= 0) counts.erase(it);
        auto wit = where.find(p);
        if (wit != where.end()) {
          wit->second.erase(w);
          if (wit->second.empty()) where.erase(wit);
        }
      }
    }
  };
  for (std::size_t w = 0; w < words.size(); ++w) account(w, +1);

  std::vector<SymbolPair> merges;
  while (vocab.size() < vocab_size && !counts.empty()) {
    const SymbolPair* best = nullptr;
    std::int64_t best_count = 0;
    std::string best_joined;
    for (const auto& [pair, count] : counts) {
      if (count < best_count) continue;
      std::string joined = pair.first + pair.second;
      if (count > best_count || joined < best_joined) {
        best = &pair;
        best_count = count;
        best_joined = std::move(joined);
      }
    }
    if (best == nullptr || best_count < static_cast<std::int64_t>(min_pair_freq)) break;
    const SymbolPair merge = *best;
    const std::vector<std::size_t> affected(where[merge].begin(), where[merge].end());
    for (auto w : affected) {
      account(w, -1);
      apply_merge(words[w], merge.first, merge.second);
      account(w, +1);
    }
    merges.push_back(merge);
    vocab.add(best_joined);
  }
  return BpeModel(std::move(vocab), std::move(merges));
}

Vocabulary build_word_vocab(const std::vector<std::string>& lines, std::size_t max_size,
                            std::size_t min_freq) {
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "no lines for word vocabulary");
  if (max_size < kNumReserved) {
    throw Error(ErrorCode::kVocabTooSmall, "max_size must be at least " +
                                               std::to_string(kNumReserved));
  }
  std::map<std::string, std::size_t> freq;
  for (const auto& line : lines) {
    for (auto& w : text::split_words(line)) ++freq[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab(VocabMode::kWord);
  for (const auto& [w, f] : ranked) {
    if (vocab.size() >= max_size || f < min_freq) break;
    vocab.add(w);
  }
  return vocab;
}

BpeModel word_model(Vocabulary vocab) {
  if (vocab.mode() != VocabMode::kWord) {
    throw Error(ErrorCode::kInvalidArgument, "word_model needs a word-level vocabulary");
  }
  return BpeModel(std::move(vocab), {});
}

std::vector<std::string> encode_pieces(const BpeModel& model, std::string_view text_in) {
  std::vector<std::string> pieces;
  for (const auto& w : text::split_words(text_in)) {
    for (auto& p : model.segment_word(w)) pieces.push_back(std::move(p));
  }
  return pieces;
}

std::vector<TokenId> encode(const BpeModel& model, std::string_view text_in) {
  std::vector<TokenId> ids;
  for (const auto& p : encode_pieces(model, text_in)) ids.push_back(model.vocab().id_of(p));
  return ids;
}

std::vector<std::vector<TokenId>> encode_lines(const BpeModel& model,
                                               const std::vector<std::string>& lines) {
  std::unordered_map<std::string, std::vector<TokenId>> cache;
  std::vector<std::vector<TokenId>> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    std::vector<TokenId> ids;
    for (const auto& w : text::split_words(line)) {
      auto it = cache.find(w);
      if (it == cache.end()) {
        std::vector<TokenId> word_ids;
        for (const auto& p : model.segment_word(w)) word_ids.push_back(model.vocab().id_of(p));
        it = cache.emplace(w, std::move(word_ids)).first;
      }
      ids.insert(ids.end(), it->second.begin(), it->second.end());
    }
    out.push_back(std::move(ids));
  }
  return out;
}

std::string decode(const BpeModel& model, const std::vector<TokenId>& ids) {
  std::vector<std::string> pieces;
  for (TokenId id : ids) {
    const std::string& piece = model.vocab().piece(id);
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    pieces.push_back(piece);
  }
  if (model.mode() == VocabMode::kWord) return text::join(pieces);
  std::string joined;
  for (const auto& p : pieces) joined += p;
  std::string out;
  const std::string marker(kBoundaryMarker);
  for (std::size_t pos = 0; pos < joined.size();) {
    if (joined.compare(pos, marker.size(), marker) == 0) {
      out.push_back(' ');
      pos += marker.size();
    } else {
      out.push_back(joined[pos]);
      ++pos;
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

std::string serialize_model(const BpeModel& model) {
  std::ostringstream out;
  out << "lrmt-subword " << kModelFormatVersion << ' ' << mode_name(model.mode()) << ' '
      << model.vocab().size() << ' ' << model.merges().size() << '\n';
  const auto& pieces = model.vocab().pieces();
  for (std::size_t id = 0; id < pieces.size(); ++id) out << pieces[id] << '\t' << id << '\n';
  for (const auto& [l, r] : model.merges()) out << l << '\t' << r << '\n';
  return out.str();
}

BpeModel parse_model(const std::string& content) {
  std::istringstream in(content);
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::kCorruptModelFile, "missing header");
  std::istringstream hs(trim_ws(header));
  std::string magic, mode;
  int version = 0;
  std::size_t vocab_size = 0, num_merges = 0;
  if (!(hs >> magic) || magic != "lrmt-subword") {
    throw Error(ErrorCode::kCorruptModelFile, "not an lrmt subword model");
  }
  if (!(hs >> version)) throw Error(ErrorCode::kCorruptModelFile, "missing version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "model version " + std::to_string(version) + ", expected " +
                    std::to_string(kModelFormatVersion));
  }
  if (!(hs >> mode >> vocab_size >> num_merges) || (mode != "bpe" && mode != "word")) {
    throw Error(ErrorCode::kCorruptModelFile, "malformed header");
  }
  Vocabulary vocab(mode == "bpe" ? VocabMode::kBpe : VocabMode::kWord);
  std::string line;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kCorruptModelFile, "truncated vocabulary");
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kCorruptModelFile, "bad vocab line");
    const std::string piece = line.substr(0, tab);
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kCorruptModelFile, "bad vocab id: " + line);
    }
    if (id != i) throw Error(ErrorCode::kCorruptModelFile, "vocab ids not contiguous");
    if (i < static_cast<std::size_t>(kNumReserved)) {
      if (piece != vocab.piece(static_cast<TokenId>(i))) {
        throw Error(ErrorCode::kCorruptModelFile, "reserved piece mismatch");
      }
      continue;
    }
    if (vocab.contains(piece)) throw Error(ErrorCode::kCorruptModelFile, "duplicate piece");
    vocab.add(piece);
  }
  std::vector<std::pair<std::string, std::string>> merges;
  for (std::size_t i = 0; i < num_merges; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kCorruptModelFile, "truncated merges");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kCorruptModelFile, "bad merge line");
    std::string l = line.substr(0, tab), r = line.substr(tab + 1);
    if (!vocab.contains(l) || !vocab.contains(r) || !vocab.contains(l + r)) {
      throw Error(ErrorCode::kCorruptModelFile, "merge references unknown piece");
    }
    merges.emplace_back(std::move(l), std::move(r));
  }
  if (vocab.mode() == VocabMode::kWord && !merges.empty()) {
    throw Error(ErrorCode::kCorruptModelFile, "word model with merges");
  }
  return BpeModel(std::move(vocab), std::move(merges));
}

void save_model(const BpeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

BpeModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace lrmt::subword
