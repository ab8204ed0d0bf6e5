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

#include "lmbsim/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lmbsim {

namespace {

// Thrown by value parsers; the caller adds the source position.
struct BadValue {
    std::string why;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

template <typename T>
T parse_int(std::string_view s) {
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw BadValue{"expected an unsigned integer, got '" + std::string(s) + "'"};
    return v;
}

std::uint32_t u32(std::string_view s) { return parse_int<std::uint32_t>(s); }
std::uint64_t u64(std::string_view s) { return parse_int<std::uint64_t>(s); }

bool parse_bool(std::string_view s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

template <typename F>
auto wrap(F&& f, std::string_view s) {
    try {
        return f(s);
    } catch (const ConfigError& e) {
        throw BadValue{e.what()};
    }
}

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

std::vector<Entry> tokenize(std::string_view text, std::string_view source) {
    std::vector<Entry> out;
    std::string section;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    auto fail = [&](const std::string& why) {
        std::ostringstream os;
        os << source << ":" << lineno << ": " << why;
        throw ConfigError(os.str());
    };
    while (std::getline(in, raw)) {
        ++lineno;
        // Comments start a line or follow whitespace.
        for (std::size_t p = 0; p < raw.size(); ++p) {
            if ((raw[p] == '#' || raw[p] == ';') && (p == 0 || raw[p - 1] == ' ' || raw[p - 1] == '\t')) {
                raw.resize(p);
                break;
            }
        }
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) fail("empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
        Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), lineno};
        if (e.key.empty()) fail("missing key before '='");
        if (section.empty()) fail("key '" + e.key + "' appears before any [section]");
        out.push_back(std::move(e));
    }
    return out;
}

using Setter = std::function<void(ConfigFile&, const std::string&)>;
using LmbSetter = std::function<void(LmbConfig&, const std::string&)>;

const std::map<std::string, LmbSetter>& lmb_keys() {
    static const std::map<std::string, LmbSetter> keys{
        {"num_lines", [](LmbConfig& l, const std::string& v) { l.cache.num_lines = u32(v); }},
        {"associativity", [](LmbConfig& l, const std::string& v) { l.cache.associativity = u32(v); }},
        {"line_width_bits", [](LmbConfig& l, const std::string& v) { l.cache.line_width_bits = u32(v); }},
        {"pipeline_depth", [](LmbConfig& l, const std::string& v) { l.cache.pipeline_depth = u32(v); }},
        {"miss_slots", [](LmbConfig& l, const std::string& v) { l.cache.miss_slots = u32(v); }},
        {"rrsh_entries", [](LmbConfig& l, const std::string& v) { l.rrsh.num_entries = u32(v); }},
        {"rrsh_ways", [](LmbConfig& l, const std::string& v) { l.rrsh.bucket_ways = u32(v); }},
        {"rrsh_pending_cap", [](LmbConfig& l, const std::string& v) { l.rrsh.pending_cap = u32(v); }},
        {"temp_buffer_lines", [](LmbConfig& l, const std::string& v) { l.temp.capacity = u32(v); }},
        {"dma_buffers", [](LmbConfig& l, const std::string& v) { l.dma.num_buffers = u32(v); }},
        {"dma_buffer_bytes", [](LmbConfig& l, const std::string& v) { l.dma.buffer_bytes = u32(v); }},
        {"pes",
         [](LmbConfig& l, const std::string& v) {
             l.pes.clear();
             for (const auto& p : split_list(v)) l.pes.push_back(u32(p));
         }},
    };
    return keys;
}

const std::map<std::string, std::map<std::string, Setter>>& plain_keys() {
    static const std::map<std::string, std::map<std::string, Setter>> keys{
        {"run",
         {
             {"mode", [](ConfigFile& c, const std::string& v) { c.run.system.mode = wrap(memory_mode_from_string, v); }},
             {"tensor", [](ConfigFile& c, const std::string& v) { c.run.tensor_path = v; }},
             {"rank", [](ConfigFile& c, const std::string& v) { c.run.rank = u32(v); }},
             {"seed", [](ConfigFile& c, const std::string& v) { c.run.seed = u64(v); }},
             {"label", [](ConfigFile& c, const std::string& v) { c.run.label = v; }},
             {"verify", [](ConfigFile& c, const std::string& v) { c.run.verify = parse_bool(v); }},
         }},
        {"gen",
         {
             {"dims",
              [](ConfigFile& c, const std::string& v) {
                  const auto parts = split_list(v);
                  if (parts.size() != 3) throw BadValue{"dims needs three extents"};
                  if (!c.run.gen) c.run.gen = GenSpec{};
                  for (std::size_t m = 0; m < 3; ++m) c.run.gen->dims[m] = u64(parts[m]);
              }},
             {"nnz",
              [](ConfigFile& c, const std::string& v) {
                  if (!c.run.gen) c.run.gen = GenSpec{};
                  c.run.gen->nnz = u64(v);
              }},
             {"seed",
              [](ConfigFile& c, const std::string& v) {
                  if (!c.run.gen) c.run.gen = GenSpec{};
                  c.run.gen->seed = u64(v);
              }},
             {"distribution",
              [](ConfigFile& c, const std::string& v) {
                  if (!c.run.gen) c.run.gen = GenSpec{};
                  c.run.gen->distribution = wrap(distribution_from_string, v);
              }},
         }},
        {"fabric",
         {
             {"type",
              [](ConfigFile& c, const std::string& v) {
                  c.run.system.fabric.fabric_type = wrap(fabric_type_from_string, v);
              }},
             {"pe_count", [](ConfigFile& c, const std::string& v) { c.run.system.fabric.pe_count = u32(v); }},
             {"compute_cycles_per_row",
              [](ConfigFile& c, const std::string& v) { c.run.system.fabric.compute_cycles_per_row = u32(v); }},
             {"max_outstanding_per_pe",
              [](ConfigFile& c, const std::string& v) { c.run.system.fabric.max_outstanding_per_pe = u32(v); }},
         }},
        {"dram",
         {
             {"data_width_bits", [](ConfigFile& c, const std::string& v) { c.run.system.dram.data_width_bits = u32(v); }},
             {"num_banks", [](ConfigFile& c, const std::string& v) { c.run.system.dram.num_banks = u32(v); }},
             {"row_bytes", [](ConfigFile& c, const std::string& v) { c.run.system.dram.row_bytes = u32(v); }},
             {"t_row_hit", [](ConfigFile& c, const std::string& v) { c.run.system.dram.t_row_hit = u32(v); }},
             {"t_row_miss", [](ConfigFile& c, const std::string& v) { c.run.system.dram.t_row_miss = u32(v); }},
             {"queue_depth", [](ConfigFile& c, const std::string& v) { c.run.system.dram.queue_depth = u32(v); }},
             {"address_bits", [](ConfigFile& c, const std::string& v) { c.run.system.dram.address_bits = u32(v); }},
         }},
        {"baseline",
         {
             {"mshr_entries", [](ConfigFile& c, const std::string& v) { c.run.system.baseline.mshr_entries = u32(v); }},
             {"cache_only_access_bytes",
              [](ConfigFile& c, const std::string& v) { c.run.system.baseline.cache_only_access_bytes = u32(v); }},
         }},
        {"sweep",
         {
             {"modes",
              [](ConfigFile& c, const std::string& v) {
                  c.sweep_modes.clear();
                  for (const auto& m : split_list(v)) c.sweep_modes.push_back(wrap(memory_mode_from_string, m));
              }},
             {"presets",
              [](ConfigFile& c, const std::string& v) {
                  c.sweep_presets = split_list(v);
                  for (const auto& p : c.sweep_presets) {
                      if (preset_kind(p) != PresetKind::System) throw BadValue{"'" + p + "' is not a system preset"};
                  }
              }},
             {"datasets",
              [](ConfigFile& c, const std::string& v) {
                  c.sweep_datasets = split_list(v);
                  for (const auto& d : c.sweep_datasets) {
                      if (!dataset_preset(d)) throw BadValue{"'" + d + "' is not a dataset preset"};
                  }
              }},
             {"jobs", [](ConfigFile& c, const std::string& v) { c.jobs = u32(v); }},
         }},
        {"output",
         {
             {"out", [](ConfigFile& c, const std::string& v) { c.out = v; }},
             {"format",
              [](ConfigFile& c, const std::string& v) {
                  if (v != "json" && v != "csv") throw BadValue{"format must be json or csv"};
                  c.format = v;
              }},
             {"plot", [](ConfigFile& c, const std::string& v) { c.plot = v; }},
         }},
    };
    return keys;
}

int kind_order(PresetKind k) { return static_cast<int>(k); }

}  // namespace

std::optional<PresetKind> preset_kind(std::string_view name) {
    if (name == "custom" || system_preset(name)) return PresetKind::System;
    if (name.starts_with("baseline-")) {
        try {
            memory_mode_from_string(name);
            return PresetKind::Baseline;
        } catch (const ConfigError&) {
            return std::nullopt;
        }
    }
    if (dataset_preset(name)) return PresetKind::Dataset;
    return std::nullopt;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names{"table2-config-a", "table2-config-b", "baseline-ip-only", "baseline-cache-only",
                                   "baseline-dma-only"};
    for (auto& d : dataset_preset_names()) names.push_back(d);
    return names;
}

void apply_preset(ConfigFile& cfg, std::string_view name) {
    const auto kind = preset_kind(name);
    if (!kind) throw ConfigError("unknown preset '" + std::string(name) + "'");
    switch (*kind) {
        case PresetKind::System: {
            if (name == "custom") {
                cfg.run.system.preset = Preset::Custom;
                break;
            }
            const MemoryMode mode = cfg.run.system.mode;
            cfg.run.system = *system_preset(name);
            cfg.run.system.mode = mode;
            break;
        }
        case PresetKind::Baseline: cfg.run.system.mode = memory_mode_from_string(name); break;
        case PresetKind::Dataset:
            cfg.run.gen = dataset_preset(name);
            cfg.run.dataset = std::string(name);
            cfg.run.tensor_path.clear();
            break;
    }
}

ConfigFile parse_config(std::string_view text, std::string_view source, const std::vector<std::string>& presets) {
    const auto entries = tokenize(text, source);
    auto fail_at = [&](const Entry& e, const std::string& why) {
        std::ostringstream os;
        os << source << ":" << e.line << ": " << why;
        throw ConfigError(os.str());
    };

    ConfigFile cfg;

    // Phase 1: presets (flags first, then the file's), grouped by kind.
    std::vector<std::string> names = presets;
    for (const auto& e : entries) {
        if (e.section == "run" && e.key == "preset") {
            for (auto& n : split_list(e.value)) {
                if (!preset_kind(n)) fail_at(e, "unknown preset '" + n + "'");
                names.push_back(std::move(n));
            }
        }
    }
    for (const auto& n : names) {
        if (!preset_kind(n)) throw ConfigError("unknown preset '" + n + "'");
    }
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        return kind_order(*preset_kind(a)) < kind_order(*preset_kind(b));
    });
    for (const auto& n : names) apply_preset(cfg, n);

    // Phase 2: dataset naming and LMB count, which later keys build on.
    for (const auto& e : entries) {
        if (e.section == "run" && e.key == "dataset") {
            if (dataset_preset(e.value)) apply_preset(cfg, e.value);
            else cfg.run.dataset = e.value;
        } else if (e.section == "lmb" && e.key == "count") {
            try {
                const auto n = u32(e.value);
                if (n == 0) fail_at(e, "lmb count must be at least 1");
                cfg.run.system.lmbs.resize(n, cfg.run.system.lmbs.back());
            } catch (const BadValue& b) {
                fail_at(e, "bad value for 'count': " + b.why);
            }
        }
    }

    // Phase 3: everything else, in file order.
    for (const auto& e : entries) {
        if (e.section == "run" && (e.key == "preset" || e.key == "dataset")) continue;
        if (e.section == "lmb" && e.key == "count") continue;
        try {
            if (e.section == "lmb" || e.section.starts_with("lmb.")) {
                const auto& keys = lmb_keys();
                const auto it = keys.find(e.key);
                if (it == keys.end() || (e.section == "lmb" && e.key == "pes")) {
                    fail_at(e, "unknown key '" + e.key + "' in [" + e.section + "]");
                }
                if (e.section == "lmb") {
                    for (auto& l : cfg.run.system.lmbs) it->second(l, e.value);
                } else {
                    const auto idx = u32(std::string_view(e.section).substr(4));
                    if (idx >= cfg.run.system.lmbs.size()) {
                        fail_at(e, "[" + e.section + "] is beyond lmb count " +
                                       std::to_string(cfg.run.system.lmbs.size()));
                    }
                    it->second(cfg.run.system.lmbs[idx], e.value);
                }
                continue;
            }
            const auto& sections = plain_keys();
            const auto sec = sections.find(e.section);
            if (sec == sections.end()) fail_at(e, "unknown section [" + e.section + "]");
            const auto it = sec->second.find(e.key);
            if (it == sec->second.end()) fail_at(e, "unknown key '" + e.key + "' in [" + e.section + "]");
            it->second(cfg, e.value);
        } catch (const BadValue& b) {
            fail_at(e, "bad value for '" + e.key + "': " + b.why);
        }
    }
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path, const std::vector<std::string>& presets) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string(), presets);
}

std::vector<RunDescriptor> sweep_runs(const ConfigFile& cfg) {
    std::vector<MemoryMode> modes = cfg.sweep_modes;
    if (modes.empty()) modes = {MemoryMode::IpOnly, MemoryMode::CacheOnly, MemoryMode::DmaOnly, MemoryMode::Proposed};
    if (modes.size() < 2) throw ConfigError("a sweep needs at least two memory modes");
    if (std::find(modes.begin(), modes.end(), MemoryMode::IpOnly) == modes.end()) {
        throw ConfigError("a sweep needs the IpOnly baseline to compute speedups");
    }
    std::vector<std::string> presets = cfg.sweep_presets;
    if (presets.empty()) presets.emplace_back();
    std::vector<std::string> datasets = cfg.sweep_datasets;
    if (datasets.empty()) datasets.emplace_back();

    std::vector<RunDescriptor> runs;
    for (const auto& p : presets) {
        for (const auto& d : datasets) {
            ConfigFile base = cfg;
            if (!p.empty()) apply_preset(base, p);
            if (!d.empty()) apply_preset(base, d);
            for (auto m : modes) {
                RunDescriptor r = base.run;
                r.system.mode = m;
                runs.push_back(std::move(r));
            }
        }
    }
    return runs;
}

std::string to_ini(const RunDescriptor& run) {
    const SystemConfig& s = run.system;
    std::ostringstream os;
    os << "[run]\n";
    os << "preset = " << to_string(s.preset) << "\n";
    os << "mode = " << to_string(s.mode) << "\n";
    os << "dataset = " << run.dataset << "\n";
    if (!run.tensor_path.empty()) os << "tensor = " << run.tensor_path << "\n";
    os << "rank = " << run.rank << "\n";
    os << "seed = " << run.seed << "\n";
    if (!run.label.empty()) os << "label = " << run.label << "\n";
    os << "verify = " << (run.verify ? "true" : "false") << "\n";
    if (run.gen && run.tensor_path.empty()) {
        const GenSpec& g = *run.gen;
        os << "\n[gen]\n";
        os << "dims = " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n";
        os << "nnz = " << g.nnz << "\n";
        os << "seed = " << g.seed << "\n";
        os << "distribution = " << to_string(g.distribution) << "\n";
    }
    os << "\n[fabric]\n";
    os << "type = " << to_string(s.fabric.fabric_type) << "\n";
    os << "pe_count = " << s.fabric.pe_count << "\n";
    os << "compute_cycles_per_row = " << s.fabric.compute_cycles_per_row << "\n";
    os << "max_outstanding_per_pe = " << s.fabric.max_outstanding_per_pe << "\n";
    os << "\n[dram]\n";
    os << "data_width_bits = " << s.dram.data_width_bits << "\n";
    os << "num_banks = " << s.dram.num_banks << "\n";
    os << "row_bytes = " << s.dram.row_bytes << "\n";
    os << "t_row_hit = " << s.dram.t_row_hit << "\n";
    os << "t_row_miss = " << s.dram.t_row_miss << "\n";
    os << "queue_depth = " << s.dram.queue_depth << "\n";
    os << "address_bits = " << s.dram.address_bits << "\n";
    os << "\n[baseline]\n";
    os << "mshr_entries = " << s.baseline.mshr_entries << "\n";
    os << "cache_only_access_bytes = " << s.baseline.cache_only_access_bytes << "\n";
    os << "\n[lmb]\n";
    os << "count = " << s.lmbs.size() << "\n";
    for (std::size_t n = 0; n < s.lmbs.size(); ++n) {
        const LmbConfig& l = s.lmbs[n];
        os << "\n[lmb." << n << "]\n";
        os << "num_lines = " << l.cache.num_lines << "\n";
        os << "associativity = " << l.cache.associativity << "\n";
        os << "line_width_bits = " << l.cache.line_width_bits << "\n";
        os << "pipeline_depth = " << l.cache.pipeline_depth << "\n";
        os << "miss_slots = " << l.cache.miss_slots << "\n";
        os << "rrsh_entries = " << l.rrsh.num_entries << "\n";
        os << "rrsh_ways = " << l.rrsh.bucket_ways << "\n";
        os << "rrsh_pending_cap = " << l.rrsh.pending_cap << "\n";
        os << "temp_buffer_lines = " << l.temp.capacity << "\n";
        os << "dma_buffers = " << l.dma.num_buffers << "\n";
        os << "dma_buffer_bytes = " << l.dma.buffer_bytes << "\n";
        if (!l.pes.empty()) {
            os << "pes =";
            for (auto p : l.pes) os << " " << p;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace lmbsim
