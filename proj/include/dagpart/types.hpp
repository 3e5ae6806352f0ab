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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dagpart {

/// Durations and timestamps, integer nanoseconds.
using TimeNs = std::int64_t;
/// Memory and transfer sizes.
using Bytes = std::int64_t;
/// Dense node index inside a CompGraph.
using NodeIndex = std::uint32_t;
/// Dense edge index inside a CompGraph.
using EdgeIndex = std::uint32_t;
using DeviceIndex = std::uint32_t;

inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();
inline constexpr TimeNs kNsPerUs = 1000;

enum class ErrorKind {
  Structural,  // cycles, dangling edges, duplicate ids
  Input,       // malformed files or arguments
  Degenerate,  // numerically meaningless input (e.g. zero total compute)
  Colocation,  // reference node separated from its referent
  SizeGuard,   // instance exceeds an enumeration limit
};

class DagpartError : public std::runtime_error {
public:
  DagpartError(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace dagpart
