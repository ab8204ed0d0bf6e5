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
#include <string>
#include <string_view>
#include <vector>

#include "lmbsim/dram.hpp"
#include "lmbsim/fabric.hpp"
#include "lmbsim/memsys.hpp"

namespace lmbsim {

enum class MemoryMode : std::uint8_t { Proposed, IpOnly, CacheOnly, DmaOnly };
enum class Preset : std::uint8_t { ConfigurationA, ConfigurationB, Custom };

std::string_view to_string(MemoryMode m);
MemoryMode memory_mode_from_string(std::string_view s);
std::string_view to_string(Preset p);
Preset preset_from_string(std::string_view s);
/// "A", "B" or "custom", as used in sweep row labels.
std::string_view preset_tag(Preset p);

struct LmbConfig {
    CacheConfig cache;
    RrshConfig rrsh;
    TempBufferConfig temp;
    DmaEngineConfig dma;
    /// Fabric ports served by this LMB. Left empty on every LMB, ports are
    /// assigned automatically (all to one LMB, or one per LMB).
    std::vector<std::uint32_t> pes;
};

/// Knobs of the degenerate baseline memory systems.
struct BaselineConfig {
    /// Conventional MSHR of the cache-only system; every miss, primary or
    /// secondary, occupies one entry until its line returns.
    std::uint32_t mshr_entries = 8;
    /// Width of one cache access in the cache-only system; fibers are read as
    /// a run of accesses of this size.
    std::uint32_t cache_only_access_bytes = 16;
};

struct SystemConfig {
    MemoryMode mode = MemoryMode::Proposed;
    Preset preset = Preset::Custom;
    std::vector<LmbConfig> lmbs{LmbConfig{}};
    DramConfig dram;
    FabricConfig fabric;
    BaselineConfig baseline;

    /// Memory ports the fabric exposes: 3 shared units for Type1, one per PE for Type2.
    std::uint32_t num_ports() const noexcept;
    /// LMB serving each port. Throws ConfigError unless every port attaches to exactly one LMB.
    std::vector<std::uint32_t> port_to_lmb() const;
    void validate() const;
};

/// Configuration A: one large LMB, Type1 fabric.
SystemConfig table2_config_a();
/// Configuration B: four LMBs, one per PE, Type2 fabric.
SystemConfig table2_config_b();
/// `table2-config-a` / `table2-config-b`.
std::optional<SystemConfig> system_preset(std::string_view name);

}  // namespace lmbsim
