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
#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace dagpart {

/// Points the default spdlog logger at stderr and sets its level from the
/// DAGPART_LOG environment variable (trace, debug, info, warn, error,
/// critical, off). Defaults to warn.
void configure_logging();

/// The library's logger; configured on first use when the caller has not
/// done so.
spdlog::logger &logger();

} // namespace dagpart
