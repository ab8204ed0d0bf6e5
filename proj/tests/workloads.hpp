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

// Hand-built inputs shared by the simulator tests and the acceptance suite.

#pragma once

#include <random>
#include <vector>

#include "lmbsim/address_map.hpp"
#include "lmbsim/rng.hpp"
#include "lmbsim/trace.hpp"

namespace workloads {

using namespace lmbsim;

/// Dense rank-1 tensor a ∘ d ∘ c with entries in [0.5, 1.5) per factor.
inline CooTensor rank_one_tensor(Dims dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> a(dims[0]), d(dims[1]), c(dims[2]);
    for (auto* v : {&a, &d, &c})
        for (auto& x : *v) x = 0.5 + unit_double(rng);
    std::vector<CooElement> e;
    for (std::uint32_t i = 0; i < dims[0]; ++i)
        for (std::uint32_t j = 0; j < dims[1]; ++j)
            for (std::uint32_t k = 0; k < dims[2]; ++k)
                e.push_back({i, j, k, static_cast<float>(a[i] * d[j] * c[k])});
    return CooTensor(dims, e);
}

/// Tensor whose records fill `lines` cache lines, four per line.
inline CooTensor shared_line_tensor(std::uint32_t lines) {
    std::vector<CooElement> e;
    for (std::uint32_t z = 0; z < 4 * lines; ++z) e.push_back({z, 0, 0, 1.0f + static_cast<float>(z)});
    return CooTensor({4ULL * lines, 1, 1}, e);
}

/// Every one of `pes` ports reads every element of the tensor in address
/// order, with no fiber traffic: pure element-read pressure on shared lines.
inline RequestTrace shared_line_trace(const AddressMap& map, std::uint32_t pes, std::uint32_t lmb_of_all = 0) {
    RequestTrace t;
    t.fabric = FabricType::Type2;
    t.rank = map.rank;
    t.num_ports = pes;
    t.num_lanes = pes;
    t.port_program.resize(pes);
    t.lane_program.resize(pes);
    for (std::uint32_t q = 0; q < pes; ++q) {
        for (std::uint64_t z = 0; z < map.nnz; ++z) {
            TraceOp op;
            op.kind = OpKind::ReadElement;
            op.port = q;
            op.lane = q;
            op.element = z;
            op.lane_seq = z;
            op.request.kind = RequestKind::CacheLineRead;
            op.request.addr = map.address_of_element(z);
            op.request.len = AddressMap::element_size;
            op.request.pe_id = q;
            op.request.lmb_id = lmb_of_all;
            op.request.tag = t.ops.size();
            t.port_program[q].push_back(static_cast<std::uint32_t>(t.ops.size()));
            t.ops.push_back(op);
        }
    }
    return t;
}

}  // namespace workloads
