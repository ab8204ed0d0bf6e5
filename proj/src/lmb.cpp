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

#include "lmbsim/lmb.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace lmbsim {

std::uint64_t byte_mask(std::uint32_t offset, std::uint32_t len) {
    if (len == 0) return 0;
    if (len >= kBeatBytes) return ~std::uint64_t{0};
    return ((std::uint64_t{1} << len) - 1) << offset;
}

void ByteLedger::mark(std::uint64_t beat, std::uint32_t offset, std::uint32_t len) {
    if (beat >= masks_.size()) throw ProtocolError("byte ledger mark on an unknown beat");
    masks_[beat] |= byte_mask(offset, len);
}

std::uint64_t ByteLedger::useful_bytes() const noexcept {
    std::uint64_t n = 0;
    for (auto m : masks_) n += static_cast<std::uint64_t>(std::popcount(m));
    return n;
}

OutBeat LmbFrontEnd::pop_beat() {
    OutBeat b = outbound_.top().beat;
    outbound_.pop();
    return b;
}

namespace {

constexpr std::uint64_t kDmaLocal = std::uint64_t{1} << 62;

struct Overlap {
    Addr start;
    std::uint32_t len;
};

// Part of [base, base + len) inside the line at `line`.
Overlap overlap(Addr base, std::uint32_t len, Addr line) {
    const Addr s = std::max(base, line);
    const Addr e = std::min(base + len, line + kBeatBytes);
    return Overlap{s, e > s ? static_cast<std::uint32_t>(e - s) : 0U};
}

// Front ends that move data with the DMA engine.
class DmaFrontEnd : public LmbFrontEnd {
  protected:
    DmaFrontEnd(const DmaEngineConfig& cfg, std::uint32_t num_ports, ByteLedger& ledger)
        : LmbFrontEnd(ledger), dma_(cfg, num_ports) {}

    void stage_dma(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) {
        DmaDescriptor d;
        d.base = req.addr;
        d.len = req.len;
        d.dir = req.kind == RequestKind::DmaWrite ? DmaDirection::Write : DmaDirection::Read;
        d.port = req.pe_id;
        d.tag = op;
        staged_.push_back(Staged{d, ready, std::move(payload)});
    }

    void tick_dma(Cycle now) {
        while (!staged_.empty() && staged_.front().ready <= now) {
            auto& s = staged_.front();
            dma_.submit(s.desc);
            payloads_.emplace(s.desc.tag, std::move(s.payload));
            staged_.pop_front();
        }
        auto granted = dma_.grant();
        if (!granted) return;
        const DmaDescriptor& d = *granted;
        ++stats_.dma_transfers;
        const std::uint64_t tid = next_tid_++;
        Transfer t{d, dma_beats(d.base, d.len), {}};
        auto pit = payloads_.find(d.tag);
        if (d.dir == DmaDirection::Write) t.data = std::move(pit->second);
        else t.data.assign(d.len, std::byte{0});
        payloads_.erase(pit);

        const Addr first = line_base(d.base);
        for (std::uint32_t idx = 0; idx < t.beats_left; ++idx) {
            const Addr line = first + Addr{idx} * kBeatBytes;
            const Overlap ov = overlap(d.base, d.len, line);
            OutBeat b;
            b.addr = line;
            b.write = d.dir == DmaDirection::Write;
            b.mask = byte_mask(static_cast<std::uint32_t>(ov.start - line), ov.len);
            b.local = kDmaLocal | (tid << 8) | idx;
            if (b.write) std::memcpy(b.data.data() + (ov.start - line), t.data.data() + (ov.start - d.base), ov.len);
            push_beat(b, now + 1);
        }
        transfers_.emplace(tid, std::move(t));
    }

    bool dma_beat(std::uint64_t local, const LineData& data, Cycle now) {
        if (!(local & kDmaLocal)) return false;
        const std::uint64_t tid = (local & ~kDmaLocal) >> 8;
        const std::uint32_t idx = static_cast<std::uint32_t>(local & 0xff);
        auto it = transfers_.find(tid);
        if (it == transfers_.end()) throw ProtocolError("dma beat for an unknown transfer");
        Transfer& t = it->second;
        if (t.desc.dir == DmaDirection::Read) {
            const Addr line = line_base(t.desc.base) + Addr{idx} * kBeatBytes;
            const Overlap ov = overlap(t.desc.base, t.desc.len, line);
            std::memcpy(t.data.data() + (ov.start - t.desc.base), data.data() + (ov.start - line), ov.len);
        }
        if (--t.beats_left == 0) {
            const auto op = static_cast<std::uint32_t>(t.desc.tag);
            if (t.desc.dir == DmaDirection::Read) respond(op, now + 1, std::move(t.data));
            else respond(op, now + 1, {});
            dma_.release();
            transfers_.erase(it);
        }
        return true;
    }

    bool dma_idle() const { return staged_.empty() && transfers_.empty() && dma_.waiting() == 0; }

  private:
    struct Staged {
        DmaDescriptor desc;
        Cycle ready;
        std::vector<std::byte> payload;
    };
    struct Transfer {
        DmaDescriptor desc;
        std::uint32_t beats_left;
        std::vector<std::byte> data;
    };

    DmaEngine dma_;
    std::deque<Staged> staged_;
    std::unordered_map<std::uint64_t, std::vector<std::byte>> payloads_;
    std::unordered_map<std::uint64_t, Transfer> transfers_;
    std::uint64_t next_tid_ = 0;
};

std::vector<std::byte> to_bytes(const std::array<std::byte, 16>& a) { return {a.begin(), a.end()}; }

// Request Reductor + non-blocking cache for tensor elements, DMA for fibers.
class ProposedLmb final : public DmaFrontEnd {
  public:
    ProposedLmb(const LmbConfig& cfg, std::uint32_t num_ports, ByteLedger& ledger)
        : DmaFrontEnd(cfg.dma, num_ports, ledger), rr_(cfg.rrsh, cfg.temp), cache_(cfg.cache), ccfg_(cfg.cache) {}

    void accept(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) override {
        if (req.kind == RequestKind::CacheLineRead) {
            MemoryRequest r = req;
            r.tag = op;
            rr_in_.push_back(ElemReq{r, ready});
        } else {
            stage_dma(req, op, ready, std::move(payload));
        }
    }

    void tick(Cycle now) override {
        while (!hits_.empty() && hits_.front().ready <= now) {
            const HitReturn h = hits_.front();
            hits_.pop_front();
            fill_reductor(h.line, h.data, h.beat_id, now);
        }

        if (!cache_in_.empty() && cache_in_.front().ready <= now) {
            const Addr line = cache_in_.front().line;
            if (auto* way = cache_.lookup(line)) {
                ++stats_.cache_lookups;
                ++stats_.cache_hits;
                hits_.push_back(HitReturn{line, now + ccfg_.pipeline_depth, way->data, way->beat_id});
                cache_in_.pop_front();
            } else if (miss_slots_.size() >= ccfg_.miss_slots) {
                ++stats_.miss_stall_cycles;
            } else {
                if (!miss_slots_.insert(line).second) throw ProtocolError("second cache fetch for a pending line");
                ++stats_.cache_lookups;
                ++stats_.cache_misses;
                OutBeat b;
                b.addr = line;
                b.local = line;
                b.from_cache = true;
                push_beat(b, now + ccfg_.pipeline_depth);
                cache_in_.pop_front();
            }
        }

        if (latch_) {
            const auto outcome = rr_.stage2(*latch_);
            if (const auto* hit = std::get_if<ServedFromTempBuffer>(&outcome)) {
                serve(*latch_, *hit, now);
                latch_.reset();
            } else if (const auto* fwd = std::get_if<LineRequestForwarded>(&outcome)) {
                cache_in_.push_back(CacheIn{fwd->line, now + 1});
                latch_.reset();
            } else if (std::holds_alternative<CoalescedIntoPending>(outcome)) {
                latch_.reset();
            } else {
                rr_.count_stall();
            }
        }
        if (!latch_ && !rr_in_.empty() && rr_in_.front().ready <= now) {
            const MemoryRequest req = rr_in_.front().req;
            rr_in_.pop_front();
            if (auto hit = rr_.stage1(req)) serve(req, *hit, now);
            else latch_ = req;
        }

        tick_dma(now);
        sync_stats();
    }

    void on_beat(std::uint64_t local, const LineData& data, std::uint64_t beat_id, Cycle now) override {
        if (dma_beat(local, data, now)) return;
        const Addr line = local;
        if (miss_slots_.erase(line) == 0) throw ProtocolError("cache fill without a miss slot");
        cache_.fill(line, data, beat_id);
        fill_reductor(line, data, beat_id, now);
        sync_stats();
    }

    bool idle() const override {
        return rr_in_.empty() && !latch_ && cache_in_.empty() && hits_.empty() && miss_slots_.empty() &&
               rr_.rrsh().occupancy() == 0 && dma_idle() && queued_beats() == 0;
    }

  private:
    struct ElemReq {
        MemoryRequest req;
        Cycle ready;
    };
    struct CacheIn {
        Addr line;
        Cycle ready;
    };
    struct HitReturn {
        Addr line;
        Cycle ready;
        LineData data;
        std::uint64_t beat_id;
    };

    void serve(const MemoryRequest& req, const ServedFromTempBuffer& hit, Cycle now) {
        ledger_.mark(hit.beat_id, line_offset(req.addr), 16);
        respond(static_cast<std::uint32_t>(req.tag), now + 1, to_bytes(hit.data));
    }

    void fill_reductor(Addr line, const LineData& data, std::uint64_t beat_id, Cycle now) {
        for (const auto& r : rr_.handle_line_fill(line, data, beat_id)) {
            ledger_.mark(beat_id, r.offset, 16);
            respond(static_cast<std::uint32_t>(r.tag), now + 1, to_bytes(r.data));
        }
    }

    void sync_stats() {
        stats_.coalesced = rr_.stats().coalesced;
        stats_.temp_hits = rr_.stats().temp_hits;
        stats_.rr_stall_cycles = rr_.stats().stall_cycles;
    }

    RequestReductor rr_;
    CacheArray cache_;
    CacheConfig ccfg_;
    std::deque<ElemReq> rr_in_;
    std::optional<MemoryRequest> latch_;
    std::deque<CacheIn> cache_in_;
    std::deque<HitReturn> hits_;
    std::unordered_set<Addr> miss_slots_;
};

// Every request is its own DMA transfer, scalars included.
class DmaOnlyLmb final : public DmaFrontEnd {
  public:
    DmaOnlyLmb(const LmbConfig& cfg, std::uint32_t num_ports, ByteLedger& ledger)
        : DmaFrontEnd(cfg.dma, num_ports, ledger) {}

    void accept(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) override {
        MemoryRequest r = req;
        if (r.kind == RequestKind::CacheLineRead) r.kind = RequestKind::DmaRead;
        stage_dma(r, op, ready, std::move(payload));
    }
    void tick(Cycle now) override { tick_dma(now); }
    void on_beat(std::uint64_t local, const LineData& data, std::uint64_t, Cycle now) override {
        if (!dma_beat(local, data, now)) throw ProtocolError("dma-only front end got a non-dma beat");
    }
    bool idle() const override { return dma_idle() && queued_beats() == 0; }
};

// Conventional non-blocking cache with an MSHR; everything goes through it.
class CacheOnlyLmb final : public LmbFrontEnd {
  public:
    CacheOnlyLmb(const LmbConfig& cfg, const BaselineConfig& base, ByteLedger& ledger)
        : LmbFrontEnd(ledger), cache_(cfg.cache), ccfg_(cfg.cache), base_(base) {}

    void accept(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) override {
        const bool write = req.kind == RequestKind::DmaWrite;
        Assembly a{req.addr, req.len, write, 0, write ? std::move(payload) : std::vector<std::byte>(req.len)};
        // Reads split into fixed-width accesses; writes go out one line at a time.
        const std::uint32_t step = write ? kBeatBytes : base_.cache_only_access_bytes;
        Addr pos = req.addr;
        const Addr end = req.addr + req.len;
        while (pos < end) {
            const Addr line = line_base(pos);
            const Addr stop = std::min({end, line + kBeatBytes, pos + step});
            in_.push_back(Access{op, line, line_offset(pos), static_cast<std::uint32_t>(stop - pos),
                                 static_cast<std::uint32_t>(pos - req.addr), write, ready});
            ++a.remaining;
            pos = stop;
        }
        open_.emplace(op, std::move(a));
    }

    void tick(Cycle now) override {
        while (!hits_.empty() && hits_.front().ready <= now) {
            const HitReturn h = hits_.front();
            hits_.pop_front();
            deliver(h.access, h.data, h.beat_id, now);
        }
        if (in_.empty() || in_.front().ready > now) return;
        const Access acc = in_.front();
        if (acc.write) {
            // Write-through, no allocate: an existing copy is updated, nothing else.
            Assembly& a = open_.at(acc.op);
            OutBeat b;
            b.addr = acc.line;
            b.write = true;
            b.mask = byte_mask(acc.line_off, acc.len);
            b.local = (std::uint64_t{acc.op} << 1) | 1U;
            std::memcpy(b.data.data() + acc.line_off, a.data.data() + acc.req_off, acc.len);
            if (auto* way = cache_.lookup(acc.line)) {
                std::memcpy(way->data.data() + acc.line_off, b.data.data() + acc.line_off, acc.len);
            }
            push_beat(b, now + ccfg_.pipeline_depth);
            in_.pop_front();
            return;
        }
        if (auto* way = cache_.lookup(acc.line)) {
            ++stats_.cache_lookups;
            ++stats_.cache_hits;
            hits_.push_back(HitReturn{acc, now + ccfg_.pipeline_depth, way->data, way->beat_id});
            in_.pop_front();
            return;
        }
        if (mshr_used_ >= base_.mshr_entries) {
            ++stats_.miss_stall_cycles;
            return;
        }
        ++stats_.cache_lookups;
        ++stats_.cache_misses;
        ++mshr_used_;
        auto [it, primary] = mshr_.try_emplace(acc.line);
        it->second.push_back(acc);
        if (primary) {
            OutBeat b;
            b.addr = acc.line;
            b.local = acc.line;
            b.from_cache = true;
            push_beat(b, now + ccfg_.pipeline_depth);
        } else {
            ++stats_.secondary_misses;
        }
        in_.pop_front();
    }

    void on_beat(std::uint64_t local, const LineData& data, std::uint64_t beat_id, Cycle now) override {
        if (local & 1U) {
            const auto op = static_cast<std::uint32_t>(local >> 1);
            Assembly& a = open_.at(op);
            if (--a.remaining == 0) finish(op, now);
            return;
        }
        const Addr line = local;
        auto it = mshr_.find(line);
        if (it == mshr_.end()) throw ProtocolError("cache fill without an mshr entry");
        cache_.fill(line, data, beat_id);
        const auto targets = std::move(it->second);
        mshr_.erase(it);
        mshr_used_ -= static_cast<std::uint32_t>(targets.size());
        for (const auto& t : targets) deliver(t, data, beat_id, now);
    }

    bool idle() const override {
        return in_.empty() && hits_.empty() && mshr_.empty() && open_.empty() && queued_beats() == 0;
    }

  private:
    struct Access {
        std::uint32_t op;
        Addr line;
        std::uint32_t line_off;
        std::uint32_t len;
        std::uint32_t req_off;
        bool write;
        Cycle ready;
    };
    struct Assembly {
        Addr base;
        std::uint32_t len;
        bool write;
        std::uint32_t remaining;
        std::vector<std::byte> data;
    };
    struct HitReturn {
        Access access;
        Cycle ready;
        LineData data;
        std::uint64_t beat_id;
    };

    void deliver(const Access& acc, const LineData& data, std::uint64_t beat_id, Cycle now) {
        Assembly& a = open_.at(acc.op);
        std::memcpy(a.data.data() + acc.req_off, data.data() + acc.line_off, acc.len);
        ledger_.mark(beat_id, acc.line_off, acc.len);
        if (--a.remaining == 0) finish(acc.op, now);
    }

    void finish(std::uint32_t op, Cycle now) {
        auto node = open_.extract(op);
        Assembly& a = node.mapped();
        respond(op, now + 1, a.write ? std::vector<std::byte>{} : std::move(a.data));
    }

    CacheArray cache_;
    CacheConfig ccfg_;
    BaselineConfig base_;
    std::deque<Access> in_;
    std::deque<HitReturn> hits_;
    std::unordered_map<Addr, std::vector<Access>> mshr_;
    std::uint32_t mshr_used_ = 0;
    std::unordered_map<std::uint32_t, Assembly> open_;
};

// Direct connection to the memory interface: raw beats, one after another.
class IpOnlyLmb final : public LmbFrontEnd {
  public:
    explicit IpOnlyLmb(ByteLedger& ledger) : LmbFrontEnd(ledger) {}

    void accept(const MemoryRequest& req, std::uint32_t op, Cycle ready, std::vector<std::byte> payload) override {
        Active a;
        a.base = req.addr;
        a.len = req.len;
        a.write = req.kind == RequestKind::DmaWrite;
        a.data = a.write ? std::move(payload) : std::vector<std::byte>(req.len);
        a.beats = dma_beats(req.addr, req.len);
        a.ready = ready;
        active_.emplace(op, std::move(a));
    }

    void tick(Cycle now) override {
        for (auto& [op, a] : active_) {
            if (a.waiting || a.ready > now) continue;
            const Addr line = line_base(a.base) + Addr{a.next} * kBeatBytes;
            const Overlap ov = overlap(a.base, a.len, line);
            OutBeat b;
            b.addr = line;
            b.write = a.write;
            b.mask = byte_mask(static_cast<std::uint32_t>(ov.start - line), ov.len);
            b.local = op;
            if (a.write) std::memcpy(b.data.data() + (ov.start - line), a.data.data() + (ov.start - a.base), ov.len);
            push_beat(b, now);
            a.waiting = true;
        }
    }

    void on_beat(std::uint64_t local, const LineData& data, std::uint64_t, Cycle now) override {
        auto it = active_.find(static_cast<std::uint32_t>(local));
        if (it == active_.end() || !it->second.waiting) throw ProtocolError("ip-only beat for an idle request");
        Active& a = it->second;
        const Addr line = line_base(a.base) + Addr{a.next} * kBeatBytes;
        if (!a.write) {
            const Overlap ov = overlap(a.base, a.len, line);
            std::memcpy(a.data.data() + (ov.start - a.base), data.data() + (ov.start - line), ov.len);
        }
        a.waiting = false;
        if (++a.next == a.beats) {
            respond(it->first, now + 1, a.write ? std::vector<std::byte>{} : std::move(a.data));
            active_.erase(it);
        }
    }

    bool idle() const override { return active_.empty() && queued_beats() == 0; }

  private:
    struct Active {
        Addr base = 0;
        std::uint32_t len = 0;
        bool write = false;
        std::vector<std::byte> data;
        std::uint32_t beats = 0;
        std::uint32_t next = 0;
        bool waiting = false;
        Cycle ready = 0;
    };
    // Ordered so beats from simultaneous requests leave in op order.
    std::map<std::uint32_t, Active> active_;
};

}  // namespace

std::unique_ptr<LmbFrontEnd> make_front_end(MemoryMode mode, const LmbConfig& lmb, const BaselineConfig& baseline,
                                            std::uint32_t num_ports, ByteLedger& ledger) {
    switch (mode) {
        case MemoryMode::Proposed: return std::make_unique<ProposedLmb>(lmb, num_ports, ledger);
        case MemoryMode::DmaOnly: return std::make_unique<DmaOnlyLmb>(lmb, num_ports, ledger);
        case MemoryMode::CacheOnly: return std::make_unique<CacheOnlyLmb>(lmb, baseline, ledger);
        case MemoryMode::IpOnly: return std::make_unique<IpOnlyLmb>(ledger);
    }
    throw ConfigError("unknown memory mode");
}

}  // namespace lmbsim
