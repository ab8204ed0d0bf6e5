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

#include "lmbsim/memsys.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace lmbsim {

std::uint32_t xor_hash(std::uint64_t key, std::uint32_t table_size) {
    if (table_size == 0 || !std::has_single_bit(table_size)) {
        throw ConfigError("hash table size must be a power of two");
    }
    const unsigned width = static_cast<unsigned>(std::countr_zero(table_size));
    if (width == 0) return 0;
    const std::uint64_t mask = table_size - 1;
    std::uint64_t h = 0;
    while (key != 0) {
        h ^= key & mask;
        key >>= width;
    }
    return static_cast<std::uint32_t>(h);
}

void CacheConfig::validate() const {
    if (num_lines == 0 || associativity == 0) throw ConfigError("cache.num_lines and associativity must be positive");
    if (!std::has_single_bit(associativity)) throw ConfigError("cache.associativity must be a power of two");
    if (num_lines % associativity != 0) throw ConfigError("cache.num_lines must be divisible by associativity");
    if (line_width_bits != kBeatBytes * 8) throw ConfigError("cache.line_width_bits must equal the 512-bit data width");
    if (pipeline_depth == 0) throw ConfigError("cache.pipeline_depth must be at least 1");
    if (miss_slots == 0) throw ConfigError("cache.miss_slots must be at least 1");
}

void RrshConfig::validate() const {
    if (bucket_ways == 0 || num_entries == 0 || num_entries % bucket_ways != 0) {
        throw ConfigError("rrsh.num_entries must be a positive multiple of rrsh.bucket_ways");
    }
    if (!std::has_single_bit(num_entries / bucket_ways)) throw ConfigError("rrsh bucket count must be a power of two");
    if (pending_cap == 0) throw ConfigError("rrsh.pending_cap must be at least 1");
}

void DmaEngineConfig::validate() const {
    if (num_buffers == 0) throw ConfigError("dma.num_buffers must be at least 1");
    if (buffer_bytes == 0) throw ConfigError("dma.buffer_bytes must be at least 1");
}

// --- TempBuffer -------------------------------------------------------------

const TempBuffer::Entry* TempBuffer::find(Addr line) const noexcept {
    for (const auto& e : entries_) {
        if (e.line == line) return &e;
    }
    return nullptr;
}

std::optional<Addr> TempBuffer::deposit(Addr line, const LineData& data, std::uint64_t beat_id) {
    if (cfg_.capacity == 0) return std::nullopt;
    auto it = std::find_if(entries_.begin(), entries_.end(), [line](const Entry& e) { return e.line == line; });
    if (it != entries_.end()) entries_.erase(it);
    std::optional<Addr> evicted;
    if (entries_.size() >= cfg_.capacity) {
        evicted = entries_.front().line;
        entries_.pop_front();
    }
    entries_.push_back(Entry{line, data, beat_id});
    return evicted;
}

// --- RRSH -------------------------------------------------------------------

RrshTable::RrshTable(RrshConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    buckets_.resize(cfg_.num_buckets());
}

std::uint32_t RrshTable::bucket_of(Addr line) const { return xor_hash(line / kBeatBytes, cfg_.num_buckets()); }

RrshTable::Entry* RrshTable::find(Addr line) {
    for (auto& e : buckets_[bucket_of(line)]) {
        if (e.line == line) return &e;
    }
    return nullptr;
}

const RrshTable::Entry* RrshTable::find(Addr line) const { return const_cast<RrshTable*>(this)->find(line); }

bool RrshTable::can_allocate(Addr line) const { return buckets_[bucket_of(line)].size() < cfg_.bucket_ways; }

RrshTable::Entry& RrshTable::allocate(Addr line) {
    auto& bucket = buckets_[bucket_of(line)];
    if (bucket.size() >= cfg_.bucket_ways) throw ProtocolError("rrsh allocate into a full bucket");
    if (find(line)) throw ProtocolError("rrsh already holds this line");
    bucket.push_back(Entry{line, {}});
    ++occupancy_;
    return bucket.back();
}

RrshTable::Entry RrshTable::release(Addr line) {
    auto& bucket = buckets_[bucket_of(line)];
    auto it = std::find_if(bucket.begin(), bucket.end(), [line](const Entry& e) { return e.line == line; });
    if (it == bucket.end()) {
        std::ostringstream os;
        os << "line fill for 0x" << std::hex << line << " has no pending rrsh entry";
        throw ProtocolError(os.str());
    }
    Entry e = std::move(*it);
    bucket.erase(it);
    --occupancy_;
    return e;
}

// --- Request Reductor ---------------------------------------------------------

namespace {

std::array<std::byte, 16> slice16(const LineData& data, std::uint32_t offset) {
    std::array<std::byte, 16> out{};
    const std::size_t n = std::min<std::size_t>(16, kBeatBytes - offset);
    std::memcpy(out.data(), data.data() + offset, n);
    return out;
}

}  // namespace

std::optional<ServedFromTempBuffer> RequestReductor::stage1(const MemoryRequest& req) {
    ++stats_.element_reads;
    if (const auto* e = temp_.find(line_base(req.addr))) {
        ++stats_.temp_hits;
        return ServedFromTempBuffer{slice16(e->data, line_offset(req.addr)), e->beat_id};
    }
    return std::nullopt;
}

ReductorOutcome RequestReductor::stage2(const MemoryRequest& req) {
    const Addr line = line_base(req.addr);
    // The line may have landed while the request sat in stage 1.
    if (const auto* e = temp_.find(line)) {
        ++stats_.temp_hits;
        ++stats_.late_temp_hits;
        return ServedFromTempBuffer{slice16(e->data, line_offset(req.addr)), e->beat_id};
    }
    const PendingRead p{req.pe_id, line_offset(req.addr), req.tag};
    if (auto* entry = rrsh_.find(line)) {
        if (entry->pending.size() >= rrsh_.pending_cap()) return Stalled{};
        entry->pending.push_back(p);
        ++stats_.coalesced;
        return CoalescedIntoPending{};
    }
    if (!rrsh_.can_allocate(line)) return Stalled{};
    rrsh_.allocate(line).pending.push_back(p);
    ++stats_.forwarded;
    return LineRequestForwarded{line};
}

ReductorOutcome RequestReductor::handle_element_read(const MemoryRequest& req) {
    if (req.kind != RequestKind::CacheLineRead) throw PreconditionError("request reductor takes element reads only");
    if (auto hit = stage1(req)) return *hit;
    return stage2(req);
}

std::vector<ElementResponse> RequestReductor::handle_line_fill(Addr line, const LineData& data,
                                                               std::uint64_t beat_id) {
    RrshTable::Entry entry = rrsh_.release(line);
    std::vector<ElementResponse> out;
    out.reserve(entry.pending.size());
    for (const auto& p : entry.pending) out.push_back(ElementResponse{p.pe_id, p.tag, p.offset, slice16(data, p.offset)});
    temp_.deposit(line, data, beat_id);
    return out;
}

// --- Cache array --------------------------------------------------------------

CacheArray::CacheArray(CacheConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    ways_.resize(cfg_.num_lines);
}

CacheArray::Way* CacheArray::lookup(Addr addr) {
    const Addr line = line_base(addr);
    const std::size_t base = std::size_t{set_of(line)} * cfg_.associativity;
    for (std::uint32_t w = 0; w < cfg_.associativity; ++w) {
        auto& way = ways_[base + w];
        if (way.valid && way.line == line) {
            way.stamp = ++clock_;
            return &way;
        }
    }
    return nullptr;
}

bool CacheArray::contains(Addr addr) const {
    const Addr line = line_base(addr);
    const std::size_t base = std::size_t{set_of(line)} * cfg_.associativity;
    for (std::uint32_t w = 0; w < cfg_.associativity; ++w) {
        if (ways_[base + w].valid && ways_[base + w].line == line) return true;
    }
    return false;
}

std::optional<Addr> CacheArray::fill(Addr addr, const LineData& data, std::uint64_t beat_id) {
    const Addr line = line_base(addr);
    if (auto* way = lookup(line)) {
        way->data = data;
        way->beat_id = beat_id;
        return std::nullopt;
    }
    const std::size_t base = std::size_t{set_of(line)} * cfg_.associativity;
    Way* victim = &ways_[base];
    for (std::uint32_t w = 0; w < cfg_.associativity; ++w) {
        Way& way = ways_[base + w];
        if (!way.valid) {
            victim = &way;
            break;
        }
        if (way.stamp < victim->stamp) victim = &way;
    }
    std::optional<Addr> evicted;
    if (victim->valid) evicted = victim->line;
    *victim = Way{true, line, ++clock_, data, beat_id};
    return evicted;
}

bool CacheArray::access(Addr addr) {
    if (lookup(addr)) return true;
    fill(addr, LineData{});
    return false;
}

// --- DMA ----------------------------------------------------------------------

std::uint32_t dma_beats(Addr base, std::uint32_t len) {
    if (len == 0) return 0;
    return static_cast<std::uint32_t>((line_base(base + len - 1) - line_base(base)) / kBeatBytes + 1);
}

DmaEngine::DmaEngine(DmaEngineConfig cfg, std::uint32_t num_ports)
    : cfg_(cfg), queues_(std::max<std::uint32_t>(num_ports, 1)), free_(cfg.num_buffers) {
    cfg_.validate();
}

void DmaEngine::submit(const DmaDescriptor& desc) {
    if (desc.len == 0) throw ConfigError("dma transfer of zero bytes");
    if (desc.len > cfg_.buffer_bytes) {
        std::ostringstream os;
        os << "dma transfer of " << desc.len << " bytes exceeds dma.buffer_bytes = " << cfg_.buffer_bytes;
        throw ConfigError(os.str());
    }
    if (desc.port >= queues_.size()) throw ProtocolError("dma descriptor from an unknown port");
    queues_[desc.port].push_back(desc);
    ++waiting_;
}

std::optional<DmaDescriptor> DmaEngine::grant() {
    if (free_ == 0 || waiting_ == 0) return std::nullopt;
    const auto n = static_cast<std::uint32_t>(queues_.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t p = (next_port_ + i) % n;
        if (queues_[p].empty()) continue;
        DmaDescriptor d = queues_[p].front();
        queues_[p].pop_front();
        --waiting_;
        --free_;
        next_port_ = (p + 1) % n;
        return d;
    }
    return std::nullopt;
}

void DmaEngine::release() {
    if (free_ >= cfg_.num_buffers) throw ProtocolError("dma buffer released twice");
    ++free_;
}

std::size_t DmaEngine::waiting() const noexcept { return waiting_; }

// --- Router -------------------------------------------------------------------

Router::Router(std::uint32_t num_ports) : num_ports_(num_ports) {
    if (num_ports == 0) throw ConfigError("router needs at least one port");
}

std::optional<std::uint32_t> Router::arbitrate(std::span<const bool> eligible) {
    for (std::uint32_t i = 0; i < num_ports_; ++i) {
        const std::uint32_t p = (next_ + i) % num_ports_;
        if (p < eligible.size() && eligible[p]) {
            next_ = (p + 1) % num_ports_;
            return p;
        }
    }
    return std::nullopt;
}

std::uint64_t Router::register_beat(std::uint32_t port) {
    const std::uint64_t tag = next_tag_++;
    owners_.emplace(tag, port);
    return tag;
}

std::uint32_t Router::route_back(std::uint64_t tag) {
    auto it = owners_.find(tag);
    if (it == owners_.end()) {
        std::ostringstream os;
        os << "response with unknown router tag " << tag;
        throw ProtocolError(os.str());
    }
    const std::uint32_t port = it->second;
    owners_.erase(it);
    return port;
}

}  // namespace lmbsim
