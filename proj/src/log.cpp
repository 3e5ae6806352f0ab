/**
 * Copyright (c) dagpart contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "dagpart/log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace dagpart {

void configure_logging() {
  auto logger = spdlog::get("dagpart");
  if (!logger)
    logger = spdlog::stderr_color_mt("dagpart");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char *env = std::getenv("DAGPART_LOG"); env && *env)
    level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

spdlog::logger &logger() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (!spdlog::get("dagpart"))
      configure_logging();
  });
  return *spdlog::get("dagpart");
}

} // namespace dagpart
