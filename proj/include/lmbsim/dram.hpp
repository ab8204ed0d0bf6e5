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
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "lmbsim/common.hpp"

namespace lmbsim {

/// Open-row bank model behind a 512-bit memory interface.
///
/// Addresses interleave row-within-bank first: the low log2(row_bytes) bits
/// select a byte inside a row, the next bits pick the bank, the rest the row.
struct DramConfig {
    std::uint32_t data_width_bits = 512;
    std::uint32_t num_banks = 8;
    std::uint32_t row_bytes = 4096;
    std::uint32_t t_row_hit = 20;
    std::uint32_t t_row_miss = 45;
    std::uint32_t queue_depth = 8;
    unsigned address_bits = 31;

    void validate() const;

    std::uint32_t bank_of(Addr addr) const noexcept {
        return static_cast<std::uint32_t>((addr / row_bytes) % num_banks);
    }
    std::uint64_t row_of(Addr addr) const noexcept { return addr / (std::uint64_t{row_bytes} * num_banks); }
};

struct DramStats {
    static constexpr std::size_t kWaitBuckets = 16;

    std::uint64_t row_hits = 0;
    std::uint64_t row_misses = 0;
    /// Sum over banks of cycles spent servicing beats.
    std::uint64_t busy_cycles = 0;
    /// Queue wait (start - arrival) bucketed by bit width: bucket b holds
    /// waits in [2^(b-1), 2^b), bucket 0 holds zero waits; the last is open.
    std::array<std::uint64_t, kWaitBuckets> wait_histogram{};

    std::uint64_t serviced() const noexcept { return row_hits + row_misses; }
};

struct DramBeat {
    Addr addr = 0;
    bool write = false;
    /// Opaque id handed back on completion (the router's tag).
    std::uint64_t token = 0;
};

struct DramCompletion {
    DramBeat beat;
    Cycle arrival = 0;
    Cycle start = 0;
    /// Cycle the bank finished the beat.
    Cycle done = 0;
    /// Cycle the beat left on the shared return bus.
    Cycle returned = 0;
    bool row_hit = false;
};

class Dram {
  public:
    explicit Dram(DramConfig cfg);

    const DramConfig& config() const noexcept { return cfg_; }
    const DramStats& stats() const noexcept { return stats_; }

    bool can_accept(Addr addr) const;
    /// Queues a beat arriving at `now`. Returns false (nothing queued) when the
    /// bank queue is full. Unaligned or out-of-range addresses are protocol bugs.
    bool enqueue(const DramBeat& beat, Cycle now);

    /// Phase 1 of a cycle: finishes beats whose service ends at `now` and puts
    /// at most one finished beat on the return bus (round-robin over banks).
    std::optional<DramCompletion> retire(Cycle now);
    /// Last phase of a cycle: idle banks start their queue heads.
    void start(Cycle now);

    bool idle() const noexcept;
    /// Beats queued, in service or awaiting the bus.
    std::uint64_t in_flight() const noexcept { return in_flight_; }

  private:
    struct Pending {
        DramBeat beat;
        Cycle arrival = 0;
    };
    struct Bank {
        std::deque<Pending> queue;
        std::optional<DramCompletion> active;
        std::deque<DramCompletion> finished;
        std::optional<std::uint64_t> open_row;
    };

    DramConfig cfg_;
    DramStats stats_;
    std::vector<Bank> banks_;
    std::uint32_t bus_next_ = 0;
    std::uint64_t in_flight_ = 0;
};

/// Drives a standalone Dram with a timed arrival list. Beats are offered in
/// order; a beat whose queue is full is re-offered every cycle and holds back
/// the ones behind it. Returns one completion per beat, in input order.
struct TimedBeat {
    DramBeat beat;
    Cycle arrival = 0;
};
std::vector<DramCompletion> dram_service(const DramConfig& cfg, std::span<const TimedBeat> beats);

}  // namespace lmbsim
