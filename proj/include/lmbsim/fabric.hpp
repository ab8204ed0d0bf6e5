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
#include <span>
#include <utility>
#include <vector>

#include "lmbsim/address_map.hpp"
#include "lmbsim/trace.hpp"

namespace lmbsim {

/// Compute-fabric parameters.
///
/// Type1 fabrics reach memory through three shared units regardless of
/// pe_count: a tensor loading unit (port 0), a matrix loading unit (port 1)
/// and a matrix store unit (port 2). Type2 fabrics give every PE its own port.
struct FabricConfig {
    FabricType fabric_type = FabricType::Type2;
    std::uint32_t pe_count = 4;
    std::uint32_t compute_cycles_per_row = 1;
    /// Requests in flight per port; also the element lookahead of a lane.
    std::uint32_t max_outstanding_per_pe = 16;

    void validate() const;
};

inline constexpr std::uint32_t kTensorLoadUnit = 0;
inline constexpr std::uint32_t kMatrixLoadUnit = 1;
inline constexpr std::uint32_t kMatrixStoreUnit = 2;

using Partition = std::pair<std::uint64_t, std::uint64_t>;

/// Splits [0, rows.size()) into `p` contiguous ranges. The first M mod p
/// ranges get ceil(M/p) elements and the rest floor(M/p); each interior
/// boundary then moves forward to the next change of row id so no output row
/// is shared by two partitions. Trailing ranges may be empty.
std::vector<Partition> partition_nonzeros(std::span<const std::uint32_t> rows, std::uint32_t p);
std::vector<Partition> partition_nonzeros(const CooTensor& tensor, std::uint32_t p);

struct FabricRun {
    FactorMatrix output;
    RequestTrace trace;
};

/// Per-PE execution of the partitioned row-flush MTTKRP. Each element issues
/// one element read and two fiber reads; a change of output row (and the end
/// of a partition) issues one fiber write. `pe_to_lmb` maps PEs onto LMBs
/// (empty: every PE on LMB 0).
FabricRun run_type2_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                               const FabricConfig& fabric, const AddressMap& map,
                               std::span<const std::uint32_t> pe_to_lmb = {});

/// Same request multiset as a single-PE Type2 run, issued by the three shared
/// units on LMB 0.
FabricRun run_type1_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                               const FabricConfig& fabric, const AddressMap& map);

FabricRun run_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                         const FabricConfig& fabric, const AddressMap& map,
                         std::span<const std::uint32_t> pe_to_lmb = {});

}  // namespace lmbsim
