// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/error.hpp"

namespace lrmt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLineCountMismatch: return "LineCountMismatch";
    case ErrorCode::kEncodingError: return "EncodingError";
    case ErrorCode::kEmptyProfiles: return "EmptyProfiles";
    case ErrorCode::kSizesExceedCorpus: return "SizesExceedCorpus";
    case ErrorCode::kSizeExceedsPool: return "SizeExceedsPool";
    case ErrorCode::kVocabTooSmall: return "VocabTooSmall";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kCorruptModelFile: return "CorruptModelFile";
    case ErrorCode::kEmptySource: return "EmptySource";
    case ErrorCode::kMalformedBatch: return "MalformedBatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kFingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::kCorrupt: return "Corrupt";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kMissingSplits: return "MissingSplits";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace lrmt
