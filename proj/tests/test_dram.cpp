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

#include <map>
#include <random>
#include <set>

#include "lmbsim/dram.hpp"
#include "lmbsim/rng.hpp"

using namespace lmbsim;

namespace {

std::vector<TimedBeat> at_zero(const std::vector<Addr>& addrs) {
    std::vector<TimedBeat> out;
    for (Addr a : addrs) out.push_back(TimedBeat{DramBeat{a, false, 0}, 0});
    return out;
}

Cycle last_return(const std::vector<DramCompletion>& c) {
    Cycle t = 0;
    for (const auto& x : c) t = std::max(t, x.returned);
    return t;
}

// One bank, everything queued up front: beats run back to back, each costing
// a hit or a miss depending on the previous row.
Cycle single_bank_total(const DramConfig& cfg, const std::vector<Addr>& addrs) {
    Cycle t = 0;
    std::optional<std::uint64_t> open;
    for (Addr a : addrs) {
        const std::uint64_t row = a / (std::uint64_t{cfg.row_bytes} * cfg.num_banks);
        t += open == row ? cfg.t_row_hit : cfg.t_row_miss;
        open = row;
    }
    return t;
}

std::vector<TimedBeat> random_trace(std::mt19937_64& rng, std::size_t n, std::uint32_t rows) {
    std::vector<TimedBeat> out;
    Cycle t = 0;
    for (std::size_t x = 0; x < n; ++x) {
        t += uniform_below(rng, 6);
        const Addr a = 64 * uniform_below(rng, std::uint64_t{rows} * 4096 / 64);
        out.push_back(TimedBeat{DramBeat{a, uniform_below(rng, 4) == 0, 0}, t});
    }
    return out;
}

}  // namespace

TEST(Dram, OpenRowHit) {
    const auto c = dram_service(DramConfig{}, at_zero({0, 64}));
    EXPECT_FALSE(c[0].row_hit);
    EXPECT_TRUE(c[1].row_hit);
    EXPECT_EQ(c[1].done - c[1].start, 20U);
}

TEST(Dram, RowConflictInOneBank) {
    DramConfig cfg;
    cfg.num_banks = 1;
    const auto c = dram_service(cfg, at_zero({0, cfg.row_bytes}));
    EXPECT_FALSE(c[1].row_hit);
    EXPECT_EQ(c[1].done - c[1].start, 45U);

    // Default interleave: the next row-sized block lives in the next bank.
    DramConfig def;
    EXPECT_NE(def.bank_of(0), def.bank_of(def.row_bytes));
    EXPECT_EQ(def.bank_of(0), def.bank_of(Addr{def.row_bytes} * def.num_banks));
}

TEST(Dram, SingleBankTotalsMatchBackToBackService) {
    DramConfig cfg;
    const Addr stride = Addr{cfg.row_bytes} * cfg.num_banks;  // same bank, next row
    std::vector<Addr> seq, rnd;
    for (Addr n = 0; n < 128; ++n) seq.push_back((n / 64) * stride + (n % 64) * 64);
    std::mt19937_64 rng(6);
    for (int n = 0; n < 128; ++n) rnd.push_back(uniform_below(rng, 1024) * stride + 64 * uniform_below(rng, 64));

    const Cycle t_seq = last_return(dram_service(cfg, at_zero(seq)));
    const Cycle t_rnd = last_return(dram_service(cfg, at_zero(rnd)));
    EXPECT_EQ(t_seq, single_bank_total(cfg, seq));
    EXPECT_EQ(t_rnd, single_bank_total(cfg, rnd));
    EXPECT_LT(t_seq, t_rnd);
}

TEST(Dram, StreamingBeatsRandomRowsByLatencyRatio) {
    DramConfig cfg;
    const Addr stride = Addr{cfg.row_bytes} * cfg.num_banks;
    std::vector<Addr> seq, rnd;
    for (Addr n = 0; n < 128; ++n) seq.push_back(64 * n);
    std::mt19937_64 rng(7);
    for (int n = 0; n < 128; ++n) rnd.push_back(uniform_below(rng, 1024) * stride);
    const double t_seq = static_cast<double>(last_return(dram_service(cfg, at_zero(seq))));
    const double t_rnd = static_cast<double>(last_return(dram_service(cfg, at_zero(rnd))));
    EXPECT_GE(t_rnd / t_seq, static_cast<double>(cfg.t_row_miss) / cfg.t_row_hit);
}

TEST(Dram, BusReturnsOneBeatPerCycle) {
    DramConfig cfg;
    std::vector<Addr> addrs;
    for (std::uint32_t b = 0; b < cfg.num_banks; ++b) addrs.push_back(Addr{b} * cfg.row_bytes);
    const auto c = dram_service(cfg, at_zero(addrs));
    std::set<Cycle> returns;
    for (const auto& x : c) {
        EXPECT_EQ(x.done, 45U);
        EXPECT_TRUE(returns.insert(x.returned).second);
    }
    EXPECT_EQ(*returns.rbegin(), 45U + cfg.num_banks - 1);
}

TEST(Dram, QueueBackPressure) {
    DramConfig cfg;
    Dram d(cfg);
    for (std::uint32_t n = 0; n < cfg.queue_depth; ++n) EXPECT_TRUE(d.enqueue(DramBeat{64ULL * n, false, n}, 0));
    EXPECT_FALSE(d.can_accept(0));
    EXPECT_FALSE(d.enqueue(DramBeat{0, false, 99}, 0));
    EXPECT_TRUE(d.can_accept(cfg.row_bytes));
    EXPECT_EQ(d.in_flight(), cfg.queue_depth);
}

TEST(Dram, ProtocolChecks) {
    Dram d(DramConfig{});
    EXPECT_THROW(d.enqueue(DramBeat{32, false, 0}, 0), ProtocolError);
    EXPECT_THROW(d.enqueue(DramBeat{Addr{1} << 31, false, 0}, 0), ProtocolError);
    DramConfig bad;
    bad.row_bytes = 100;
    EXPECT_THROW(Dram{bad}, ConfigError);
    bad = DramConfig{};
    bad.t_row_hit = 0;
    EXPECT_THROW(Dram{bad}, ConfigError);
}

TEST(Dram, WorkConservingFifoBanks) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        DramConfig cfg;
        const auto trace = random_trace(rng, 400, 64);
        const auto c = dram_service(cfg, trace);
        std::map<std::uint32_t, std::vector<const DramCompletion*>> per_bank;
        for (const auto& x : c) per_bank[cfg.bank_of(x.beat.addr)].push_back(&x);
        std::uint64_t hits = 0, misses = 0;
        std::set<Cycle> returns;
        for (auto& [bank, v] : per_bank) {
            std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->start < b->start; });
            for (std::size_t n = 0; n < v.size(); ++n) {
                const Cycle ready = n == 0 ? v[n]->arrival : std::max(v[n]->arrival, v[n - 1]->done);
                EXPECT_EQ(v[n]->start, ready) << "bank " << bank << " idled with work queued";
                if (n > 0) EXPECT_GE(v[n]->arrival, v[n - 1]->arrival);  // FIFO
                EXPECT_EQ(v[n]->done - v[n]->start, v[n]->row_hit ? cfg.t_row_hit : cfg.t_row_miss);
            }
        }
        for (const auto& x : c) {
            (x.row_hit ? hits : misses)++;
            EXPECT_GE(x.returned, x.done);
            EXPECT_TRUE(returns.insert(x.returned).second);
        }
        EXPECT_EQ(hits + misses, c.size());
    }
}

TEST(Dram, DeterministicAndStatsConsistent) {
    std::mt19937_64 rng(11);
    const auto trace = random_trace(rng, 300, 16);
    const auto a = dram_service(DramConfig{}, trace);
    const auto b = dram_service(DramConfig{}, trace);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        EXPECT_EQ(a[n].returned, b[n].returned);
        EXPECT_EQ(a[n].start, b[n].start);
    }

    Dram d(DramConfig{});
    std::size_t next = 0, served = 0;
    for (Cycle now = 0; served < trace.size(); ++now) {
        if (d.retire(now)) ++served;
        while (next < trace.size() && trace[next].arrival <= now && d.enqueue(trace[next].beat, now)) ++next;
        d.start(now);
    }
    EXPECT_TRUE(d.idle());
    EXPECT_EQ(d.stats().serviced(), trace.size());
    std::uint64_t histogram_total = 0;
    for (auto h : d.stats().wait_histogram) histogram_total += h;
    EXPECT_EQ(histogram_total, trace.size());
}

TEST(Dram, SlowerRowMissNeverFinishesEarlier) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto trace = random_trace(rng, 200, 32);
        DramConfig fast, slow;
        slow.t_row_miss = fast.t_row_miss + 1 + static_cast<std::uint32_t>(uniform_below(rng, 40));
        const auto a = dram_service(fast, trace);
        const auto b = dram_service(slow, trace);
        for (std::size_t n = 0; n < trace.size(); ++n) {
            EXPECT_GE(b[n].done, a[n].done) << "trial " << trial << " beat " << n;
            EXPECT_GE(b[n].returned, a[n].returned) << "trial " << trial << " beat " << n;
        }
    }
}
