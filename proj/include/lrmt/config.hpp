// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lrmt {

// Flat `key=value` settings, one per line. Blank lines and lines starting
// with '#' are ignored. Keys keep insertion-independent (sorted) order when
// written back out.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& content);
  static KeyValueFile read(const std::filesystem::path& path);

  void write(const std::filesystem::path& path) const;
  std::string to_string() const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated integer list.
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         const std::vector<std::int64_t>& fallback) const;

  // Parses `key=value` and sets it. Throws on a missing '='.
  void apply_override(const std::string& assignment);

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::int64_t> parse_int_list(const std::string& text);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);

// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace lrmt
