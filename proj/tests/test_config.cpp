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

#include <gtest/gtest.h>

#include "lmbsim/config_file.hpp"

using namespace lmbsim;

namespace {

std::string config_error(std::string_view text, const std::vector<std::string>& presets = {}) {
    try {
        parse_config(text, "cfg.ini", presets);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ConfigFile, EmptyTextGivesDefaults) {
    const auto cfg = parse_config("");
    EXPECT_EQ(cfg.run.system.mode, MemoryMode::Proposed);
    EXPECT_EQ(cfg.run.rank, 32u);
    EXPECT_TRUE(cfg.run.verify);
    EXPECT_EQ(cfg.format, "json");
    EXPECT_EQ(cfg.jobs, 1u);
}

TEST(ConfigFile, UnknownKeyNamesKeyAndLine) {
    const auto msg = config_error("# header\n[dram]\nt_row_hit = 20\ncolumn_width = 3\n");
    EXPECT_NE(msg.find("cfg.ini:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'column_width'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[dram]"), std::string::npos) << msg;
}

TEST(ConfigFile, RejectsUnknownSectionsAndBadValues) {
    EXPECT_NE(config_error("[cache]\nnum_lines = 4\n").find("unknown section [cache]"), std::string::npos);
    const auto msg = config_error("[run]\nrank = thirty\n");
    EXPECT_NE(msg.find("cfg.ini:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bad value for 'rank'"), std::string::npos) << msg;
    EXPECT_NE(config_error("[run]\nmode = fastest\n").find("'mode'"), std::string::npos);
    EXPECT_NE(config_error("key = 1\n").find("cfg.ini:1"), std::string::npos);
    EXPECT_NE(config_error("", {"table3-config-c"}).find("table3-config-c"), std::string::npos);
    EXPECT_NE(config_error("[lmb]\npes = 0\n").find("'pes'"), std::string::npos);
    EXPECT_NE(config_error("[lmb.1]\nnum_lines = 64\n").find("beyond lmb count 1"), std::string::npos);
}

TEST(ConfigFile, CommentsAndWhitespace) {
    const auto cfg = parse_config("; lead\n  [run]  \n  rank = 8   # trailing\n\n# x = y\nseed=7\n");
    EXPECT_EQ(cfg.run.rank, 8u);
    EXPECT_EQ(cfg.run.seed, 7u);
}

TEST(ConfigFile, PresetNamesAreRecognised) {
    for (const char* n : {"table2-config-a", "table2-config-b", "baseline-ip-only", "baseline-cache-only",
                          "baseline-dma-only", "synth01-mini", "synth02-mini"}) {
        EXPECT_TRUE(preset_kind(n).has_value()) << n;
        EXPECT_NO_THROW(parse_config("", "x", {n})) << n;
    }
    EXPECT_EQ(preset_names().size(), 7u);
    EXPECT_FALSE(preset_kind("synth03-mini"));
}

TEST(ConfigFile, SystemPresetExpandsToFactoryConfig) {
    const auto b = parse_config("[run]\npreset = table2-config-b\n").run.system;
    const auto ref = table2_config_b();
    EXPECT_EQ(b.preset, Preset::ConfigurationB);
    EXPECT_EQ(b.fabric.fabric_type, FabricType::Type2);
    EXPECT_EQ(b.lmbs.size(), ref.lmbs.size());
    EXPECT_EQ(b.lmbs[0].cache.num_lines, ref.lmbs[0].cache.num_lines);
    EXPECT_EQ(b.dram.t_row_miss, ref.dram.t_row_miss);

    const auto a = parse_config("", "x", {"table2-config-a"}).run.system;
    EXPECT_EQ(a.fabric.fabric_type, FabricType::Type1);
    EXPECT_EQ(a.lmbs.size(), 1u);
}

TEST(ConfigFile, PresetOrderDoesNotMatterAndKeysWin) {
    // Baseline presets pick the mode, whichever order they are named in.
    for (const auto& order : {std::vector<std::string>{"baseline-dma-only", "table2-config-b"},
                              std::vector<std::string>{"table2-config-b", "baseline-dma-only"}}) {
        const auto cfg = parse_config("[dram]\nt_row_miss = 60\n", "x", order);
        EXPECT_EQ(cfg.run.system.mode, MemoryMode::DmaOnly);
        EXPECT_EQ(cfg.run.system.preset, Preset::ConfigurationB);
        EXPECT_EQ(cfg.run.system.dram.t_row_miss, 60u);
    }
    // A key given before the preset line still overrides it.
    const auto cfg = parse_config("[run]\nmode = cache-only\npreset = table2-config-a, baseline-ip-only\n");
    EXPECT_EQ(cfg.run.system.mode, MemoryMode::CacheOnly);
}

TEST(ConfigFile, DatasetPresetSetsGenerator) {
    const auto cfg = parse_config("[run]\npreset = synth02-mini\n[gen]\nseed = 9\n");
    ASSERT_TRUE(cfg.run.gen);
    const auto ref = *dataset_preset("synth02-mini");
    EXPECT_EQ(cfg.run.gen->dims, ref.dims);
    EXPECT_EQ(cfg.run.gen->nnz, ref.nnz);
    EXPECT_EQ(cfg.run.gen->seed, 9u);
    EXPECT_EQ(cfg.run.dataset, "synth02-mini");

    const auto by_key = parse_config("[run]\ndataset = synth01-mini\n");
    ASSERT_TRUE(by_key.run.gen);
    EXPECT_EQ(by_key.run.gen->nnz, dataset_preset("synth01-mini")->nnz);
}

TEST(ConfigFile, PerLmbSections) {
    const auto cfg = parse_config(
        "[fabric]\ntype = Type2\npe_count = 4\n"
        "[lmb]\ncount = 2\nnum_lines = 1024\n"
        "[lmb.0]\npes = 0, 1\n[lmb.1]\npes = 2 3\nassociativity = 4\n");
    const auto& l = cfg.run.system.lmbs;
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0].cache.num_lines, 1024u);
    EXPECT_EQ(l[1].cache.num_lines, 1024u);
    EXPECT_EQ(l[1].cache.associativity, 4u);
    EXPECT_EQ(l[0].pes, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_EQ(l[1].pes, (std::vector<std::uint32_t>{2, 3}));
    EXPECT_NO_THROW(cfg.run.system.validate());
}

TEST(ConfigFile, SweepExpansion) {
    const auto cfg = parse_config(
        "[sweep]\npresets = table2-config-a, table2-config-b\ndatasets = synth01-mini synth02-mini\njobs = 3\n");
    EXPECT_EQ(cfg.jobs, 3u);
    const auto runs = sweep_runs(cfg);
    ASSERT_EQ(runs.size(), 2u * 2u * 4u);
    std::size_t ip = 0;
    for (const auto& r : runs) {
        if (r.system.mode == MemoryMode::IpOnly) ++ip;
        EXPECT_TRUE(r.gen.has_value());
    }
    EXPECT_EQ(ip, 4u);
    EXPECT_EQ(default_label(runs.front()), "A_Type1_synth01-mini");
    EXPECT_EQ(default_label(runs.back()), "B_Type2_synth02-mini");

    EXPECT_THROW(sweep_runs(parse_config("[sweep]\nmodes = proposed, dma-only\n")), ConfigError);
    EXPECT_THROW(sweep_runs(parse_config("[sweep]\nmodes = ip-only\n")), ConfigError);
    EXPECT_THROW(parse_config("[sweep]\npresets = synth01-mini\n"), ConfigError);
    EXPECT_THROW(parse_config("[sweep]\ndatasets = table2-config-a\n"), ConfigError);
}

TEST(ConfigFile, IniRoundTripIsAFixedPoint) {
    auto cfg = parse_config("[run]\npreset = table2-config-b, baseline-cache-only\nrank = 8\nlabel = rt\n"
                            "[gen]\ndims = 12 10 9\nnnz = 40\nseed = 5\ndistribution = mode-clustered\n"
                            "[dram]\nt_row_hit = 18\n[lmb.2]\nmiss_slots = 4\n");
    const std::string ini = to_ini(cfg.run);
    const auto again = parse_config(ini, "roundtrip");
    EXPECT_EQ(to_ini(again.run), ini);
    EXPECT_EQ(again.run.system.dram.t_row_hit, 18u);
    EXPECT_EQ(again.run.system.lmbs[2].cache.miss_slots, 4u);
    EXPECT_EQ(again.run.system.lmbs[1].cache.miss_slots, cfg.run.system.lmbs[1].cache.miss_slots);
    EXPECT_EQ(again.run.system.mode, MemoryMode::CacheOnly);
}

TEST(ConfigFile, EffectiveConfigReproducesTheReport) {
    const auto cfg = parse_config("[run]\npreset = table2-config-a\nrank = 8\n[gen]\ndims = 16 16 16\nnnz = 60\n");
    const auto first = simulate(cfg.run).report;
    ASSERT_FALSE(first.effective_config.empty());
    const auto replay = parse_config(first.effective_config, "effective");
    const auto second = simulate(replay.run).report;
    EXPECT_EQ(to_json(first), to_json(second));
    EXPECT_TRUE(second.verified);
}
