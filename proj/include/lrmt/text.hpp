// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lrmt::text {

// Strict UTF-8 decode. Throws Error(kEncodingError) on malformed input.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t cp);
bool is_valid_utf8(std::string_view s);

bool is_whitespace(char32_t cp);
bool is_control(char32_t cp);  // general category Cc
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);    // general category Nd

// Splits on runs of Unicode whitespace; no empty tokens.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

// Maps Unicode whitespace to ' ', collapses runs, trims.
std::string normalize_spaces(std::string_view s);

std::string lowercase(std::string_view s);

}  // namespace lrmt::text
