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
#include <optional>

#include "lmbsim/tensor.hpp"

namespace lmbsim {

enum class Segment : std::uint8_t { Tensor, MatD, MatC, MatOut };

/// Byte layout of one MTTKRP in external memory: tensor records, then D, C
/// and the output matrix, each row-major and 64-byte aligned.
struct AddressMap {
    static constexpr std::uint32_t element_size = 16;
    static constexpr std::uint32_t matrix_elem_size = 4;

    Addr tensor_base = 0;
    Addr matD_base = 0;
    Addr matC_base = 0;
    Addr matOut_base = 0;
    Addr end = 0;  ///< one past the last byte of the output segment
    std::uint64_t nnz = 0;
    std::uint64_t d_rows = 0;
    std::uint64_t c_rows = 0;
    std::uint64_t out_rows = 0;
    std::uint32_t rank = 0;

    std::uint64_t row_bytes() const noexcept { return std::uint64_t{rank} * matrix_elem_size; }
    std::uint64_t span() const noexcept { return end - tensor_base; }

    Addr address_of_element(std::uint64_t z) const noexcept { return tensor_base + element_size * z; }
    Addr address_of_row(Segment m, std::uint64_t row) const noexcept {
        return base_of(m) + row * row_bytes();
    }
    Addr base_of(Segment m) const noexcept;
    /// Size in bytes of a segment, without alignment padding.
    std::uint64_t bytes_of(Segment m) const noexcept;

    /// Segment holding `addr`, or nullopt for padding and out-of-map addresses.
    std::optional<Segment> segment_of(Addr addr) const noexcept;
};

/// Lays out tensor, D (J rows), C (K rows) and Out (I rows) starting at `base`.
/// Throws ConfigError when base is unaligned or the map exceeds `address_bits`.
AddressMap build_address_map(const CooTensor& tensor, std::uint32_t rank, Addr base = 0,
                             unsigned address_bits = 48);

}  // namespace lmbsim
