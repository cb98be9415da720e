// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace lrmt {

void configure_logging() {
  static bool configured = false;
  if (!configured) {
    auto logger = spdlog::stderr_color_mt("lrmt");
    logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    configured = true;
  }
  const char* env = std::getenv("LRMT_LOG");
  spdlog::level::level_enum level = spdlog::level::info;
  if (env != nullptr && *env != '\0') level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

}  // namespace lrmt
