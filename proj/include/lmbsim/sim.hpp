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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmbsim/memory_image.hpp"
#include "lmbsim/system.hpp"

namespace lmbsim {

struct SimOptions {
    /// Compare the simulated output against the reference MTTKRP.
    bool verify = true;
    /// Abort when nothing moves for this many cycles.
    Cycle deadlock_cycles = 1'000'000;
};

struct LatencyStats {
    std::uint64_t count = 0;
    Cycle p50 = 0;
    Cycle p95 = 0;
    Cycle max = 0;
};

/// Nearest-rank percentiles of `samples` (sorted in place).
LatencyStats summarize_latencies(std::vector<Cycle>& samples);

struct SimReport {
    std::string label;
    std::string dataset;
    std::string mode;
    std::string preset;
    std::string fabric;
    std::uint32_t pe_count = 0;
    std::uint32_t rank = 0;
    std::uint64_t seed = 0;
    Dims dims{0, 0, 0};
    std::uint64_t nnz = 0;
    std::uint64_t tensor_fingerprint = 0;

    /// Makespan: cycle of the last completion, counting from the first issue at cycle 0.
    Cycle total_cycles = 0;
    /// Indexed by RequestKind.
    std::array<LatencyStats, 3> latency{};

    std::uint64_t cache_lookups = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t secondary_misses = 0;
    std::uint64_t coalesced = 0;
    std::uint64_t temp_hits = 0;
    /// Cache-originated fetches issued while an identical one was in flight on the same LMB.
    std::uint64_t duplicate_line_fetches = 0;

    std::uint64_t dram_beats = 0;
    std::uint64_t dram_row_hits = 0;
    std::uint64_t dram_row_misses = 0;
    std::uint64_t dram_busy_cycles = 0;

    std::uint64_t total_bytes = 0;
    std::uint64_t useful_bytes = 0;
    std::uint64_t wasted_bytes = 0;

    /// Per fabric port: cycles with work left but nothing issued.
    std::vector<std::uint64_t> stall_cycles;

    bool verified = false;
    std::optional<double> max_rel_error;

    /// Fully expanded configuration the run came from (INI text), if known.
    std::string effective_config;
};

/// JSON with a fixed key order.
std::string to_json(const SimReport& r);
std::string report_csv_header();
std::string to_csv_row(const SimReport& r);

/// Runs a prepared request trace through the memory system. Fills the
/// timing and traffic fields of the report; identity fields are left empty.
SimReport run_trace(const RequestTrace& trace, const SystemConfig& system, MemoryImage& image,
                    const SimOptions& options = {});

/// Everything that determines one run.
struct RunDescriptor {
    SystemConfig system;
    /// Tensor file (text or binary); takes precedence over `gen`.
    std::string tensor_path;
    std::optional<GenSpec> gen;
    std::string dataset = "custom";
    std::uint32_t rank = 32;
    /// Seed of the factor matrices.
    std::uint64_t seed = 1;
    /// Row label; defaults to <configuration>_<fabric>_<dataset>.
    std::string label;
    bool verify = true;
};

std::string default_label(const RunDescriptor& run);

struct SimResult {
    FactorMatrix output;
    SimReport report;
};

/// Factor matrices of a run: D and C drawn from the run seed.
std::pair<FactorMatrix, FactorMatrix> run_factors(const CooTensor& tensor, std::uint32_t rank, std::uint64_t seed);

CooTensor load_run_tensor(const RunDescriptor& run);

SimResult simulate(const RunDescriptor& run, const SimOptions& options = {});
SimResult simulate(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C, const SystemConfig& system,
                   const SimOptions& options = {});

// ---------------------------------------------------------------------------
// Comparison

struct SpeedupRow {
    std::string label;
    std::string mode;
    Cycle cycles = 0;
    double speedup = 0.0;
    /// Published speedup over the IP-only system, for side-by-side reading.
    double ref_speedup = 0.0;
};

struct SpeedupTable {
    std::vector<SpeedupRow> rows;
    /// "PASS" / "FAIL" for Proposed < DmaOnly < CacheOnly < IpOnly per label,
    /// "N/A" when a label lacks one of the four modes.
    std::vector<std::pair<std::string, std::string>> ordering;
};

/// Reference speedup over IP-only reported for a mode (IpOnly 1.0).
double published_speedup(MemoryMode mode);

/// Builds the table from finished runs. Runs sharing a label must share their
/// tensor (ConfigError otherwise) and include an IpOnly run.
SpeedupTable speedup_table(std::span<const SimReport> reports);

/// Runs every descriptor (up to `jobs` at a time) and tabulates speedups.
std::vector<SimResult> run_all(std::span<const RunDescriptor> runs, unsigned jobs = 1,
                               const SimOptions& options = {});
SpeedupTable compare(std::span<const RunDescriptor> runs, unsigned jobs = 1);

/// Adds one `geomean` row per mode averaging the speedups of all labels.
void append_geomean(SpeedupTable& table);

std::string to_csv(const SpeedupTable& t);
std::string to_json(const SpeedupTable& t);

}  // namespace lmbsim
