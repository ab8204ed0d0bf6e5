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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "lmbsim/cp_als.hpp"
#include "lmbsim/sim.hpp"
#include "oracles.hpp"
#include "workloads.hpp"

using namespace lmbsim;

namespace {

// Pinned tolerances and budgets.
constexpr double kRelTol = 1e-4;
constexpr double kMinSpeedup = 2.0;
constexpr double kLookupSlack = 1.05;
constexpr double kCacheOnlyLookupFactor = 3.0;
constexpr double kChiSquareAlpha = 0.01;
constexpr double kRankOneFit = 0.999;
constexpr std::uint32_t kRankOneIters = 25;
constexpr double kCorrectnessBudgetSeconds = 120.0;
constexpr double kOrderingBudgetSeconds = 600.0;
constexpr double kCoalescingBudgetSeconds = 10.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

const MemoryMode kModes[] = {MemoryMode::Proposed, MemoryMode::DmaOnly, MemoryMode::CacheOnly, MemoryMode::IpOnly};

SystemConfig with_mode(SystemConfig s, MemoryMode m) {
    s.mode = m;
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome functional_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20260101);
    const std::uint32_t ranks[] = {2, 8, 32};
    std::uint64_t sims = 0, dense_checked = 0;
    double worst = 0.0, worst_dense = 0.0;
    for (int n = 0; n < 200; ++n) {
        // Every other tensor is small enough for the dense cross-check.
        const std::uint64_t extent = n % 2 == 0 ? 8 : 32;
        const Dims dims{1 + uniform_below(rng, extent), 1 + uniform_below(rng, extent), 1 + uniform_below(rng, extent)};
        const std::uint64_t cells = dims[0] * dims[1] * dims[2];
        const std::uint64_t nnz = uniform_below(rng, std::min<std::uint64_t>(512, cells) + 1);
        const auto dist = uniform_below(rng, 4) == 0 ? Distribution::ModeClustered : Distribution::Uniform;
        const auto tensor = gen_synthetic(GenSpec{dims, nnz, 5000 + static_cast<std::uint64_t>(n), dist});
        const std::uint32_t rank = ranks[uniform_below(rng, 3)];
        const auto [D, C] = run_factors(tensor, rank, static_cast<std::uint64_t>(n));
        const auto ref = mttkrp_oracle(tensor, D, C);

        if (dims[0] <= 8 && dims[1] <= 8 && dims[2] <= 8) {
            worst_dense = std::max(worst_dense, max_relative_error(ref, oracle::dense_mttkrp(tensor, D, C)));
            ++dense_checked;
        }
        for (const auto& base : {table2_config_a(), table2_config_b()}) {
            for (auto m : kModes) {
                SimOptions opt;
                opt.verify = false;  // compared here with the pinned tolerance
                const auto res = simulate(tensor, D, C, with_mode(base, m), opt);
                worst = std::max(worst, max_relative_error(res.output, ref));
                ++sims;
            }
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst <= kRelTol && worst_dense <= kRelTol && secs < kCorrectnessBudgetSeconds;
    std::ostringstream os;
    os << sims << " simulations, max rel err " << worst << "; " << dense_checked
       << " dense checks, max rel err " << worst_dense << "; " << secs << " s";
    o.detail = os.str();
    return o;
}

Outcome speedup_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RunDescriptor> runs;
    for (const char* dataset : {"synth01-mini", "synth02-mini"}) {
        for (const auto& base : {table2_config_a(), table2_config_b()}) {
            for (auto m : kModes) {
                RunDescriptor r;
                r.system = with_mode(base, m);
                r.gen = dataset_preset(dataset);
                r.dataset = dataset;
                runs.push_back(r);
            }
        }
    }
    const auto results = run_all(runs, 1);
    std::vector<SimReport> reports;
    bool verified = true;
    for (const auto& r : results) {
        reports.push_back(r.report);
        verified = verified && r.report.verified;
    }
    const auto table = speedup_table(reports);

    Outcome o;
    o.pass = verified;
    std::ostringstream os;
    for (const auto& [label, verdict] : table.ordering) {
        double proposed = 0.0;
        for (const auto& row : table.rows) {
            if (row.label == label && row.mode == "Proposed") proposed = row.speedup;
        }
        o.pass = o.pass && verdict == "PASS" && proposed >= kMinSpeedup;
        os << label << " ordering " << verdict << " proposed " << proposed << "x; ";
    }
    const double secs = seconds_since(t0);
    o.pass = o.pass && secs < kOrderingBudgetSeconds;
    os << secs << " s";
    o.detail = os.str();
    return o;
}

Outcome coalescing() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr std::uint32_t kLines = 1000;
    const auto tensor = workloads::shared_line_tensor(kLines);
    const auto [D, C] = run_factors(tensor, 8, 1);
    const auto map = build_address_map(tensor, 8);
    const auto trace = workloads::shared_line_trace(map, 4);
    SystemConfig sys = table2_config_a();
    sys.preset = Preset::Custom;
    sys.fabric.fabric_type = FabricType::Type2;
    sys.fabric.pe_count = 4;

    MemoryImage img(tensor, D, C, map);
    const auto proposed = run_trace(trace, sys, img);
    MemoryImage img2(tensor, D, C, map);
    const auto cache_only = run_trace(trace, with_mode(sys, MemoryMode::CacheOnly), img2);
    const double secs = seconds_since(t0);

    Outcome o;
    o.pass = proposed.cache_lookups <= kLookupSlack * kLines && proposed.duplicate_line_fetches == 0 &&
             cache_only.cache_lookups >= kCacheOnlyLookupFactor * kLines && secs < kCoalescingBudgetSeconds;
    std::ostringstream os;
    os << "proposed lookups " << proposed.cache_lookups << ", duplicate fetches " << proposed.duplicate_line_fetches
       << "; cache-only lookups " << cache_only.cache_lookups << "; " << secs << " s";
    o.detail = os.str();
    return o;
}

Outcome hand_walk() {
    const CooTensor tensor({1, 1, 1}, {{0, 0, 0, 1.5f}});
    constexpr std::uint32_t kRank = 32;
    const auto [D, C] = run_factors(tensor, kRank, 1);
    const SystemConfig sys = table2_config_b();
    const auto expected = oracle::single_element_cycles(kRank, sys.lmbs[0].cache.pipeline_depth, sys.dram.t_row_hit,
                                                        sys.dram.t_row_miss, sys.fabric.compute_cycles_per_row);
    const auto res = simulate(tensor, D, C, sys);
    Outcome o;
    o.pass = res.report.total_cycles == expected && res.report.dram_beats == 1 + 2 + 2 + 2 && res.report.verified;
    std::ostringstream os;
    os << "simulated " << res.report.total_cycles << " cycles, hand-walk " << expected << ", beats "
       << res.report.dram_beats;
    o.detail = os.str();
    return o;
}

Outcome component_equivalence() {
    Outcome o;
    std::uint64_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const std::uint32_t ways = 1U << uniform_below(rng, 3);
        const std::uint32_t lines = ways * (1U << (3 + uniform_below(rng, 8)));
        CacheArray cache(CacheConfig{lines, ways});
        oracle::ReferenceCache ref(lines, ways);
        const std::uint64_t span = 64ULL * lines * (1 + uniform_below(rng, 4));
        for (int n = 0; n < 10000; ++n) {
            const Addr a = uniform_below(rng, span);
            mismatches += cache.access(a) != ref.access(a);
        }
    }
    std::uint64_t dma_bad = 0;
    for (std::uint32_t len = 4; len <= 256; ++len) dma_bad += dma_beats(0, len) != (len + 63) / 64;

    constexpr std::uint32_t kBuckets = 4096;
    std::vector<double> hist(kBuckets, 0.0);
    std::mt19937_64 rng(77);
    constexpr std::uint32_t kSamples = 1'000'000;
    for (std::uint32_t n = 0; n < kSamples; ++n) hist[xor_hash(rng() & 0xffffffffULL, kBuckets)] += 1.0;
    const double expected = static_cast<double>(kSamples) / kBuckets;
    double stat = 0.0;
    for (double h : hist) stat += (h - expected) * (h - expected) / expected;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(kBuckets - 1), stat));

    o.pass = mismatches == 0 && dma_bad == 0 && p > kChiSquareAlpha;
    std::ostringstream os;
    os << "cache mismatches " << mismatches << " over 1e6 requests; dma beat errors " << dma_bad
       << "; chi-square p = " << p;
    o.detail = os.str();
    return o;
}

Outcome cp_als_sanity() {
    const auto tensor = workloads::rank_one_tensor({12, 10, 8}, 3);
    CpAlsOptions opt;
    opt.rank = 1;
    opt.max_iters = kRankOneIters;
    std::uint64_t calls = 0;
    opt.mttkrp = [&](const CooTensor& t, int mode, const FactorMatrix& a, const FactorMatrix& b,
                     const FactorMatrix& c) {
        ++calls;
        return mttkrp_mode(t, mode, a, b, c);
    };
    const auto res = cp_als(tensor, opt);
    const double fit = res.fit_history.empty() ? 0.0 : res.fit_history.back();
    Outcome o;
    o.pass = fit >= kRankOneFit && res.iterations <= kRankOneIters && calls == 3ULL * res.iterations;
    std::ostringstream os;
    os << "fit " << fit << " after " << res.iterations << " iterations, " << calls << " MTTKRP calls";
    o.detail = os.str();
    return o;
}

Outcome determinism() {
    std::vector<RunDescriptor> runs;
    for (const auto& base : {table2_config_a(), table2_config_b()}) {
        for (auto m : kModes) {
            RunDescriptor r;
            r.system = with_mode(base, m);
            r.gen = GenSpec{{300, 200, 100}, 3000, 11, Distribution::ModeClustered};
            r.dataset = "det";
            r.seed = 5;
            runs.push_back(r);
        }
    }
    std::uint64_t differ = 0;
    for (const auto& r : runs) differ += to_json(simulate(r).report) != to_json(simulate(r).report);
    Outcome o;
    o.pass = differ == 0;
    o.detail = std::to_string(runs.size()) + " descriptors run twice, " + std::to_string(differ) + " differing reports";
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"functional correctness", functional_correctness},
        {"speedup ordering", speedup_ordering},
        {"coalescing", coalescing},
        {"hand-walked micro-run", hand_walk},
        {"component equivalence", component_equivalence},
        {"cp-als sanity", cp_als_sanity},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = Outcome{false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%d] %-24s %s  (%s)\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
