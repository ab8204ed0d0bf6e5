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
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "lmbsim/common.hpp"

namespace lmbsim {

enum class RequestKind : std::uint8_t { CacheLineRead, DmaRead, DmaWrite };

std::string_view to_string(RequestKind k);

/// One request from the compute fabric to its LMB.
struct MemoryRequest {
    RequestKind kind = RequestKind::CacheLineRead;
    /// Element-granular for CacheLineRead; the LMB front end aligns to lines.
    Addr addr = 0;
    std::uint32_t len = 0;
    std::uint32_t pe_id = 0;
    std::uint32_t lmb_id = 0;
    std::uint64_t tag = 0;
    Cycle issue_cycle = 0;
};

enum class FabricType : std::uint8_t { Type1, Type2 };

std::string_view to_string(FabricType t);
FabricType fabric_type_from_string(std::string_view s);

enum class OpKind : std::uint8_t { ReadElement, ReadFiberD, ReadFiberC, Accumulate, WriteRow };

/// Ordering edge between two trace ops. `on_issue` edges are satisfied when
/// the producer issues; the rest wait for its completion.
struct Dep {
    std::int64_t op = -1;
    bool on_issue = false;
};

struct TraceOp {
    OpKind kind = OpKind::ReadElement;
    /// Unused for Accumulate.
    MemoryRequest request;
    /// Issuing port for memory ops.
    std::uint32_t port = 0;
    /// Compute lane whose accumulator consumes (or, for writes, produces) the data.
    std::uint32_t lane = 0;
    std::uint64_t element = 0;
    std::uint32_t row = 0;
    /// Position of the element within its lane; bounds the lookahead window.
    std::uint64_t lane_seq = 0;
    std::array<Dep, 3> deps{};
};

/// Ordered request stream of one MTTKRP with its data dependencies.
struct RequestTrace {
    FabricType fabric = FabricType::Type2;
    std::uint32_t rank = 0;
    std::uint32_t num_ports = 0;
    std::uint32_t num_lanes = 0;
    std::vector<TraceOp> ops;
    /// Per port: memory-op indices in program order.
    std::vector<std::vector<std::uint32_t>> port_program;
    /// Per lane: Accumulate-op indices in program order.
    std::vector<std::vector<std::uint32_t>> lane_program;

    std::uint64_t count(RequestKind kind) const;
    std::uint64_t count_port(RequestKind kind, std::uint32_t port) const;

    /// One line per memory op: `cycle kind lmb pe addr len tag`.
    void dump(std::ostream& os) const;
};

inline RequestKind request_kind_of(OpKind k) {
    switch (k) {
        case OpKind::ReadElement: return RequestKind::CacheLineRead;
        case OpKind::WriteRow: return RequestKind::DmaWrite;
        default: return RequestKind::DmaRead;
    }
}

inline bool is_memory_op(OpKind k) { return k != OpKind::Accumulate; }

}  // namespace lmbsim
