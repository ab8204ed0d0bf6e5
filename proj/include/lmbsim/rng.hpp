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

#include <cstdint>
#include <random>

namespace lmbsim {

// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so these conversions keep generated data identical
// across standard libraries.

/// Uniform integer in [0, bound). bound must be nonzero.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

/// Uniform float in [0, 1) with 24 bits of mantissa.
inline float unit_float(std::mt19937_64& rng) {
    return static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
}

/// Uniform double in [0, 1) with 53 bits of mantissa.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace lmbsim
