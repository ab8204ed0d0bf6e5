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

#include <span>

#include "lmbsim/address_map.hpp"
#include "lmbsim/tensor.hpp"

namespace lmbsim {

/// Byte contents of external memory for one MTTKRP: tensor records, D and C
/// read-only, the output segment writable. Padding reads as zero.
class MemoryImage {
  public:
    MemoryImage(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C, const AddressMap& map);

    void read(Addr addr, std::span<std::byte> out) const;
    LineData read_line(Addr line) const;

    /// Writes the bytes of `data` selected by `mask` (bit b = byte b) to the
    /// line at `line`. Only the output segment is writable.
    void write_line(Addr line, const LineData& data, std::uint64_t mask);

    const FactorMatrix& output() const noexcept { return out_; }
    const AddressMap& map() const noexcept { return map_; }

  private:
    const CooTensor& tensor_;
    const FactorMatrix& D_;
    const FactorMatrix& C_;
    AddressMap map_;
    FactorMatrix out_;
};

/// Decodes a 16-byte tensor record.
CooElement decode_element(std::span<const std::byte> bytes);
void encode_element(const CooElement& e, std::span<std::byte> out);

}  // namespace lmbsim
