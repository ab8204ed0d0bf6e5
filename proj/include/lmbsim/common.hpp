/*
 * Copyright 2026 The lmbsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lmbsim {

using Cycle = std::uint64_t;
using Addr = std::uint64_t;

/// Width of one memory-interface beat (512-bit data path) and of a cache line.
inline constexpr std::uint32_t kBeatBytes = 64;

using LineData = std::array<std::byte, kBeatBytes>;

inline constexpr Addr line_base(Addr addr) noexcept { return addr & ~Addr{kBeatBytes - 1}; }
inline constexpr std::uint32_t line_offset(Addr addr) noexcept {
    return static_cast<std::uint32_t>(addr & (kBeatBytes - 1));
}

// Error families. Callers (the CLI in particular) map these onto exit codes.

/// Invalid parameters or inconsistent shapes.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (files, coordinates).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An operation was called on inputs violating its precondition.
class PreconditionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Singular systems and other numerical breakdowns.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Internal protocol violation inside the simulated memory system. Always a bug.
class ProtocolError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Simulated output disagrees with the oracle.
class VerificationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace lmbsim
