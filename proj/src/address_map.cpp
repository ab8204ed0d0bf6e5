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

#include "lmbsim/address_map.hpp"

#include <sstream>

namespace lmbsim {

namespace {

constexpr Addr align_up(Addr a) { return (a + kBeatBytes - 1) & ~Addr{kBeatBytes - 1}; }

}  // namespace

Addr AddressMap::base_of(Segment m) const noexcept {
    switch (m) {
        case Segment::Tensor: return tensor_base;
        case Segment::MatD: return matD_base;
        case Segment::MatC: return matC_base;
        case Segment::MatOut: return matOut_base;
    }
    return 0;
}

std::uint64_t AddressMap::bytes_of(Segment m) const noexcept {
    switch (m) {
        case Segment::Tensor: return nnz * element_size;
        case Segment::MatD: return d_rows * row_bytes();
        case Segment::MatC: return c_rows * row_bytes();
        case Segment::MatOut: return out_rows * row_bytes();
    }
    return 0;
}

std::optional<Segment> AddressMap::segment_of(Addr addr) const noexcept {
    for (Segment m : {Segment::Tensor, Segment::MatD, Segment::MatC, Segment::MatOut}) {
        const Addr b = base_of(m);
        if (addr >= b && addr < b + bytes_of(m)) return m;
    }
    return std::nullopt;
}

AddressMap build_address_map(const CooTensor& tensor, std::uint32_t rank, Addr base, unsigned address_bits) {
    if (base % kBeatBytes != 0) throw ConfigError("address map base must be 64-byte aligned");
    if (rank == 0) throw ConfigError("rank must be at least 1");

    AddressMap m;
    m.rank = rank;
    m.nnz = tensor.nnz();
    m.out_rows = tensor.dim(0);
    m.d_rows = tensor.dim(1);
    m.c_rows = tensor.dim(2);

    // Each step is checked against the cap before the next, so no sum can wrap.
    const Addr cap = address_bits >= 64 ? ~Addr{0} : (Addr{1} << address_bits);
    auto place = [&](Addr start, std::uint64_t count, std::uint64_t unit) {
        if (count != 0 && unit > (cap - start) / count) {
            std::ostringstream os;
            os << "address map exceeds the " << address_bits << "-bit address space";
            throw ConfigError(os.str());
        }
        const Addr next = align_up(start + count * unit);
        if (next > cap) throw ConfigError("address map exceeds the address space");
        return next;
    };
    m.tensor_base = base;
    m.matD_base = place(m.tensor_base, m.nnz, AddressMap::element_size);
    m.matC_base = place(m.matD_base, m.d_rows, m.row_bytes());
    m.matOut_base = place(m.matC_base, m.c_rows, m.row_bytes());
    m.end = place(m.matOut_base, m.out_rows, m.row_bytes());
    return m;
}

}  // namespace lmbsim
