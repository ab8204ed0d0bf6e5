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
#include <memory>
#include <queue>
#include <vector>

#include "lmbsim/system.hpp"

namespace lmbsim {

/// Per-beat record of which bytes the fabric actually consumed or wrote.
class ByteLedger {
  public:
    std::uint64_t open(std::uint64_t mask) {
        masks_.push_back(mask);
        return masks_.size() - 1;
    }
    void mark(std::uint64_t beat, std::uint32_t offset, std::uint32_t len);

    std::uint64_t beats() const noexcept { return masks_.size(); }
    std::uint64_t total_bytes() const noexcept { return masks_.size() * kBeatBytes; }
    std::uint64_t useful_bytes() const noexcept;

  private:
    std::vector<std::uint64_t> masks_;
};

/// Byte mask of [offset, offset + len) within one line.
std::uint64_t byte_mask(std::uint32_t offset, std::uint32_t len);

/// Beat leaving an LMB towards the router.
struct OutBeat {
    Addr addr = 0;
    bool write = false;
    LineData data{};
    /// Bytes known to be useful when the beat is issued (write data, DMA ranges).
    std::uint64_t mask = 0;
    /// Front-end private id handed back with the response beat.
    std::uint64_t local = 0;
    /// Line fetch caused by an element or cache read (coalescing bookkeeping).
    bool from_cache = false;
};

struct FrontEndResponse {
    std::uint32_t op = 0;
    Cycle ready = 0;
    std::vector<std::byte> data;
};

struct FrontEndStats {
    std::uint64_t cache_lookups = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    /// Misses to a line that already had a fetch outstanding (cache-only MSHR).
    std::uint64_t secondary_misses = 0;
    std::uint64_t coalesced = 0;
    std::uint64_t temp_hits = 0;
    std::uint64_t rr_stall_cycles = 0;
    std::uint64_t miss_stall_cycles = 0;
    std::uint64_t dma_transfers = 0;
};

/// Memory-side half of one LMB (or its baseline replacement). Driven by the
/// engine once per cycle; never touches DRAM directly.
class LmbFrontEnd {
  public:
    virtual ~LmbFrontEnd() = default;

    /// A request that becomes visible to the LMB at cycle `ready`. Writes carry
    /// their payload.
    virtual void accept(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) = 0;
    virtual void tick(Cycle now) = 0;
    /// Read data or write acknowledgement for a beat this LMB issued.
    virtual void on_beat(std::uint64_t local, const LineData& data, std::uint64_t beat_id, Cycle now) = 0;
    virtual bool idle() const = 0;

    const FrontEndStats& stats() const noexcept { return stats_; }

    bool has_ready_beat(Cycle now) const { return !outbound_.empty() && outbound_.top().ready <= now; }
    const OutBeat& peek_beat() const { return outbound_.top().beat; }
    OutBeat pop_beat();
    std::size_t queued_beats() const noexcept { return outbound_.size(); }

    std::vector<FrontEndResponse>& responses() noexcept { return responses_; }

  protected:
    explicit LmbFrontEnd(ByteLedger& ledger) : ledger_(ledger) {}

    void push_beat(const OutBeat& b, Cycle ready) { outbound_.push(Queued{ready, seq_++, b}); }
    void respond(std::uint32_t op, Cycle ready, std::vector<std::byte> data) {
        responses_.push_back(FrontEndResponse{op, ready, std::move(data)});
    }

    ByteLedger& ledger_;
    FrontEndStats stats_;

  private:
    struct Queued {
        Cycle ready;
        std::uint64_t seq;
        OutBeat beat;
        bool operator<(const Queued& o) const { return ready != o.ready ? ready > o.ready : seq > o.seq; }
    };
    std::priority_queue<Queued> outbound_;
    std::uint64_t seq_ = 0;
    std::vector<FrontEndResponse> responses_;
};

std::unique_ptr<LmbFrontEnd> make_front_end(MemoryMode mode, const LmbConfig& lmb, const BaselineConfig& baseline,
                                            std::uint32_t num_ports, ByteLedger& ledger);

}  // namespace lmbsim
