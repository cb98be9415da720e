// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <spdlog/spdlog.h>

namespace lrmt {

// Reads LRMT_LOG (trace|debug|info|warn|error|off) and configures the default
// logger to write to stderr. Defaults to info.
void configure_logging();

}  // namespace lrmt
