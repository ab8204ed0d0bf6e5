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

#include "lmbsim/memory_image.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace lmbsim {

static_assert(std::endian::native == std::endian::little, "memory image assumes a little-endian host");

CooElement decode_element(std::span<const std::byte> bytes) {
    CooElement e;
    std::memcpy(&e.i, bytes.data(), 4);
    std::memcpy(&e.j, bytes.data() + 4, 4);
    std::memcpy(&e.k, bytes.data() + 8, 4);
    std::memcpy(&e.val, bytes.data() + 12, 4);
    return e;
}

void encode_element(const CooElement& e, std::span<std::byte> out) {
    std::memcpy(out.data(), &e.i, 4);
    std::memcpy(out.data() + 4, &e.j, 4);
    std::memcpy(out.data() + 8, &e.k, 4);
    std::memcpy(out.data() + 12, &e.val, 4);
}

MemoryImage::MemoryImage(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                         const AddressMap& map)
    : tensor_(tensor), D_(D), C_(C), map_(map) {
    out_ = FactorMatrix::Zero(static_cast<Eigen::Index>(map.out_rows), map.rank);
}

void MemoryImage::read(Addr addr, std::span<std::byte> out) const {
    std::fill(out.begin(), out.end(), std::byte{0});
    std::size_t pos = 0;
    while (pos < out.size()) {
        const Addr a = addr + pos;
        const auto seg = map_.segment_of(a);
        if (!seg) {
            ++pos;
            continue;
        }
        const std::uint64_t off = a - map_.base_of(*seg);
        const std::uint64_t seg_left = map_.bytes_of(*seg) - off;
        const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(seg_left, out.size() - pos));
        switch (*seg) {
            case Segment::Tensor: {
                for (std::size_t b = 0; b < n;) {
                    const std::uint64_t z = (off + b) / kElementBytes;
                    const std::uint64_t within = (off + b) % kElementBytes;
                    std::array<std::byte, kElementBytes> rec{};
                    encode_element(tensor_[z], rec);
                    const std::size_t take = std::min<std::size_t>(kElementBytes - within, n - b);
                    std::memcpy(out.data() + pos + b, rec.data() + within, take);
                    b += take;
                }
                break;
            }
            case Segment::MatD:
                std::memcpy(out.data() + pos, reinterpret_cast<const std::byte*>(D_.data()) + off, n);
                break;
            case Segment::MatC:
                std::memcpy(out.data() + pos, reinterpret_cast<const std::byte*>(C_.data()) + off, n);
                break;
            case Segment::MatOut:
                std::memcpy(out.data() + pos, reinterpret_cast<const std::byte*>(out_.data()) + off, n);
                break;
        }
        pos += n;
    }
}

LineData MemoryImage::read_line(Addr line) const {
    LineData d{};
    read(line, d);
    return d;
}

void MemoryImage::write_line(Addr line, const LineData& data, std::uint64_t mask) {
    auto* base = reinterpret_cast<std::byte*>(out_.data());
    const std::uint64_t bytes = map_.bytes_of(Segment::MatOut);
    for (unsigned b = 0; b < kBeatBytes; ++b) {
        if (!((mask >> b) & 1U)) continue;
        const Addr a = line + b;
        if (a < map_.matOut_base || a >= map_.matOut_base + bytes) {
            std::ostringstream os;
            os << "write to 0x" << std::hex << a << " outside the output segment";
            throw ProtocolError(os.str());
        }
        base[a - map_.matOut_base] = data[b];
    }
}

}  // namespace lmbsim
