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

#include "lmbsim/system.hpp"

#include <sstream>

namespace lmbsim {

std::string_view to_string(MemoryMode m) {
    switch (m) {
        case MemoryMode::Proposed: return "Proposed";
        case MemoryMode::IpOnly: return "IpOnly";
        case MemoryMode::CacheOnly: return "CacheOnly";
        case MemoryMode::DmaOnly: return "DmaOnly";
    }
    return "?";
}

MemoryMode memory_mode_from_string(std::string_view s) {
    if (s == "Proposed" || s == "proposed") return MemoryMode::Proposed;
    if (s == "IpOnly" || s == "ip-only" || s == "baseline-ip-only") return MemoryMode::IpOnly;
    if (s == "CacheOnly" || s == "cache-only" || s == "baseline-cache-only") return MemoryMode::CacheOnly;
    if (s == "DmaOnly" || s == "dma-only" || s == "baseline-dma-only") return MemoryMode::DmaOnly;
    throw ConfigError("unknown memory mode '" + std::string(s) + "'");
}

std::string_view to_string(Preset p) {
    switch (p) {
        case Preset::ConfigurationA: return "table2-config-a";
        case Preset::ConfigurationB: return "table2-config-b";
        case Preset::Custom: return "custom";
    }
    return "?";
}

Preset preset_from_string(std::string_view s) {
    if (s == "table2-config-a" || s == "A") return Preset::ConfigurationA;
    if (s == "table2-config-b" || s == "B") return Preset::ConfigurationB;
    if (s == "custom") return Preset::Custom;
    throw ConfigError("unknown preset '" + std::string(s) + "'");
}

std::string_view preset_tag(Preset p) {
    switch (p) {
        case Preset::ConfigurationA: return "A";
        case Preset::ConfigurationB: return "B";
        case Preset::Custom: return "custom";
    }
    return "?";
}

std::uint32_t SystemConfig::num_ports() const noexcept {
    return fabric.fabric_type == FabricType::Type1 ? 3 : fabric.pe_count;
}

std::vector<std::uint32_t> SystemConfig::port_to_lmb() const {
    if (lmbs.empty()) throw ConfigError("system needs at least one LMB");
    const std::uint32_t ports = num_ports();
    const auto n = static_cast<std::uint32_t>(lmbs.size());
    std::vector<std::uint32_t> map(ports, n);

    bool explicit_map = false;
    for (const auto& l : lmbs) explicit_map = explicit_map || !l.pes.empty();
    if (!explicit_map) {
        if (n == 1) return std::vector<std::uint32_t>(ports, 0);
        if (n != ports) {
            std::ostringstream os;
            os << n << " LMBs cannot be assigned automatically to " << ports << " fabric ports";
            throw ConfigError(os.str());
        }
        for (std::uint32_t p = 0; p < ports; ++p) map[p] = p;
        return map;
    }
    for (std::uint32_t l = 0; l < n; ++l) {
        for (auto pe : lmbs[l].pes) {
            if (pe >= ports) throw ConfigError("lmb attaches PE " + std::to_string(pe) + " which does not exist");
            if (map[pe] != n) throw ConfigError("PE " + std::to_string(pe) + " attaches to more than one LMB");
            map[pe] = l;
        }
    }
    for (std::uint32_t p = 0; p < ports; ++p) {
        if (map[p] == n) throw ConfigError("PE " + std::to_string(p) + " is not attached to any LMB");
    }
    return map;
}

void SystemConfig::validate() const {
    fabric.validate();
    dram.validate();
    for (const auto& l : lmbs) {
        l.cache.validate();
        l.rrsh.validate();
        l.dma.validate();
    }
    if (baseline.mshr_entries == 0) throw ConfigError("baseline.mshr_entries must be at least 1");
    if (baseline.cache_only_access_bytes == 0 || baseline.cache_only_access_bytes > kBeatBytes) {
        throw ConfigError("baseline.cache_only_access_bytes must be in 1..64");
    }
    if (preset == Preset::ConfigurationA && lmbs.size() != 1) throw ConfigError("table2-config-a has exactly one LMB");
    if (preset == Preset::ConfigurationB && (lmbs.size() != 4 || num_ports() != 4)) {
        throw ConfigError("table2-config-b has four LMBs, one per PE");
    }
    (void)port_to_lmb();
}

SystemConfig table2_config_a() {
    SystemConfig s;
    s.preset = Preset::ConfigurationA;
    LmbConfig l;
    l.cache.num_lines = 8192;
    l.cache.associativity = 2;
    l.dma = DmaEngineConfig{4, 256};
    l.rrsh.num_entries = 4096;
    l.temp.capacity = 8;
    s.lmbs = {l};
    s.fabric.fabric_type = FabricType::Type1;
    s.fabric.pe_count = 4;
    return s;
}

SystemConfig table2_config_b() {
    SystemConfig s;
    s.preset = Preset::ConfigurationB;
    LmbConfig l;
    l.cache.num_lines = 4096;
    l.cache.associativity = 1;
    l.dma = DmaEngineConfig{4, 256};
    l.rrsh.num_entries = 4096;
    l.temp.capacity = 8;
    s.lmbs.assign(4, l);
    s.fabric.fabric_type = FabricType::Type2;
    s.fabric.pe_count = 4;
    return s;
}

std::optional<SystemConfig> system_preset(std::string_view name) {
    if (name == "table2-config-a") return table2_config_a();
    if (name == "table2-config-b") return table2_config_b();
    return std::nullopt;
}

}  // namespace lmbsim
