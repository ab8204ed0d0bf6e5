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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lmbsim/sim.hpp"

namespace lmbsim {

/// Everything a config file can set: the run itself plus sweep and output
/// settings. The accepted keys are documented in docs/config.md.
struct ConfigFile {
    RunDescriptor run;

    /// Sweep axes; empty means "the run's own value".
    std::vector<MemoryMode> sweep_modes;
    std::vector<std::string> sweep_presets;
    std::vector<std::string> sweep_datasets;
    unsigned jobs = 1;

    std::string out;
    std::string format = "json";
    std::string plot;
};

enum class PresetKind { System, Baseline, Dataset };

/// Which family a preset name belongs to, or nullopt for unknown names.
std::optional<PresetKind> preset_kind(std::string_view name);
std::vector<std::string> preset_names();

/// Applies one named preset: a system configuration, a baseline memory mode
/// or a dataset. ConfigError on unknown names.
void apply_preset(ConfigFile& cfg, std::string_view name);

/// Parses INI-style text (`[section]` headers, `key = value`, `#`/`;`
/// comments). `presets` are expanded before the file's own keys, in the order
/// system, baseline, dataset, so explicit keys always win. Errors are
/// ConfigError messages of the form `<source>:<line>: ...`.
ConfigFile parse_config(std::string_view text, std::string_view source = "<config>",
                        const std::vector<std::string>& presets = {});
ConfigFile load_config(const std::filesystem::path& path, const std::vector<std::string>& presets = {});

/// Expands the sweep axes into one run per (system preset, dataset, mode),
/// labelled `<configuration>_<fabric>_<dataset>` unless the file sets a label.
/// ConfigError when fewer than two modes are listed or IpOnly is missing.
std::vector<RunDescriptor> sweep_runs(const ConfigFile& cfg);

/// Fully expanded INI text for a run; parse_config of the result reproduces it.
std::string to_ini(const RunDescriptor& run);

}  // namespace lmbsim
