// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrmt {

enum class ErrorCode {
  kLineCountMismatch,
  kEncodingError,
  kEmptyProfiles,
  kSizesExceedCorpus,
  kSizeExceedsPool,
  kVocabTooSmall,
  kEmptyInput,
  kUnknownId,
  kFormatVersionMismatch,
  kCorruptModelFile,
  kEmptySource,
  kMalformedBatch,
  kShapeMismatch,
  kEmptySplit,
  kVersionMismatch,
  kFingerprintMismatch,
  kCorrupt,
  kLengthMismatch,
  kMissingSplits,
  kIoError,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lrmt
