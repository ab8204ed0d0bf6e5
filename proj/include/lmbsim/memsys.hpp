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
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lmbsim/common.hpp"
#include "lmbsim/trace.hpp"

namespace lmbsim {

/// Folds `key` into log2(table_size) bits by XOR-ing successive chunks of that
/// width. `table_size` must be a power of two (ConfigError otherwise).
std::uint32_t xor_hash(std::uint64_t key, std::uint32_t table_size);

// ---------------------------------------------------------------------------
// Configuration

struct CacheConfig {
    std::uint32_t num_lines = 8192;
    std::uint32_t associativity = 2;
    std::uint32_t line_width_bits = 512;
    std::uint32_t pipeline_depth = 3;
    /// Outstanding distinct line misses the cache can track.
    std::uint32_t miss_slots = 16;

    std::uint32_t num_sets() const noexcept { return num_lines / associativity; }
    void validate() const;
};

struct RrshConfig {
    std::uint32_t num_entries = 4096;
    std::uint32_t bucket_ways = 4;
    std::uint32_t pending_cap = 64;

    std::uint32_t num_buckets() const noexcept { return num_entries / bucket_ways; }
    void validate() const;
};

struct TempBufferConfig {
    std::uint32_t capacity = 8;
};

struct DmaEngineConfig {
    std::uint32_t num_buffers = 4;
    std::uint32_t buffer_bytes = 256;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Temporary buffer

/// Small fully associative store of the most recently filled lines, FIFO
/// replacement. Lookups match the full line address.
class TempBuffer {
  public:
    struct Entry {
        Addr line = 0;
        LineData data{};
        /// Beat that brought the line in, for byte-use accounting.
        std::uint64_t beat_id = 0;
    };

    explicit TempBuffer(TempBufferConfig cfg = {}) : cfg_(cfg) {}

    const Entry* find(Addr line) const noexcept;
    /// Inserts or refreshes a line; returns the evicted line address, if any.
    std::optional<Addr> deposit(Addr line, const LineData& data, std::uint64_t beat_id);
    std::size_t size() const noexcept { return entries_.size(); }
    std::uint32_t capacity() const noexcept { return cfg_.capacity; }

  private:
    TempBufferConfig cfg_;
    std::deque<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Recent request status holder

struct PendingRead {
    std::uint32_t pe_id = 0;
    std::uint32_t offset = 0;
    std::uint64_t tag = 0;
};

/// Hash table of lines with an outstanding fetch, each with the element reads
/// waiting on it. Buckets are `bucket_ways`-way; a full bucket refuses new
/// lines, and the caller stalls.
class RrshTable {
  public:
    explicit RrshTable(RrshConfig cfg = {});

    struct Entry {
        Addr line = 0;
        std::vector<PendingRead> pending;
    };

    std::uint32_t bucket_of(Addr line) const;
    Entry* find(Addr line);
    const Entry* find(Addr line) const;
    bool can_allocate(Addr line) const;
    /// Precondition: can_allocate(line) and no entry for line.
    Entry& allocate(Addr line);
    /// Removes and returns the entry; ProtocolError if absent.
    Entry release(Addr line);

    std::size_t occupancy() const noexcept { return occupancy_; }
    std::uint32_t pending_cap() const noexcept { return cfg_.pending_cap; }

  private:
    RrshConfig cfg_;
    std::vector<std::vector<Entry>> buckets_;
    std::size_t occupancy_ = 0;
};

// ---------------------------------------------------------------------------
// Request Reductor

struct ServedFromTempBuffer {
    std::array<std::byte, 16> data{};
    std::uint64_t beat_id = 0;
};
struct CoalescedIntoPending {};
struct LineRequestForwarded {
    Addr line = 0;
};
struct Stalled {};

using ReductorOutcome = std::variant<ServedFromTempBuffer, CoalescedIntoPending, LineRequestForwarded, Stalled>;

struct ElementResponse {
    std::uint32_t pe_id = 0;
    std::uint64_t tag = 0;
    std::uint32_t offset = 0;
    std::array<std::byte, 16> data{};
};

struct ReductorStats {
    std::uint64_t element_reads = 0;
    std::uint64_t temp_hits = 0;
    std::uint64_t late_temp_hits = 0;
    std::uint64_t coalesced = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t stall_cycles = 0;
};

/// Converts element reads into line reads. Stage 1 probes the TempBuffer;
/// stage 2 re-probes it, then merges the read into a pending RRSH entry or
/// allocates one and forwards a single line read to the cache.
class RequestReductor {
  public:
    RequestReductor(RrshConfig rrsh = {}, TempBufferConfig temp = {}) : rrsh_(rrsh), temp_(temp) {}

    /// Both stages back to back (single-cycle view used by unit tests).
    ReductorOutcome handle_element_read(const MemoryRequest& req);

    /// Stage 1: TempBuffer only. Returns nullopt on miss.
    std::optional<ServedFromTempBuffer> stage1(const MemoryRequest& req);
    /// Stage 2: TempBuffer re-probe, then RRSH.
    ReductorOutcome stage2(const MemoryRequest& req);

    /// Satisfies every read pending on `line`, deposits the line in the
    /// TempBuffer and frees the entry. ProtocolError if no entry exists.
    std::vector<ElementResponse> handle_line_fill(Addr line, const LineData& data, std::uint64_t beat_id = 0);

    const RrshTable& rrsh() const noexcept { return rrsh_; }
    const TempBuffer& temp_buffer() const noexcept { return temp_; }
    const ReductorStats& stats() const noexcept { return stats_; }
    void count_stall() noexcept { ++stats_.stall_cycles; }

  private:
    RrshTable rrsh_;
    TempBuffer temp_;
    ReductorStats stats_;
};

// ---------------------------------------------------------------------------
// Cache array

/// Set-associative tag/data array with LRU replacement inside a set. Every
/// entry point accepts any byte address of the line.
class CacheArray {
  public:
    explicit CacheArray(CacheConfig cfg);

    struct Way {
        bool valid = false;
        Addr line = 0;
        std::uint64_t stamp = 0;
        LineData data{};
        std::uint64_t beat_id = 0;
    };

    std::uint32_t set_of(Addr line) const noexcept {
        return static_cast<std::uint32_t>((line / kBeatBytes) % cfg_.num_sets());
    }

    /// Tag compare; a hit refreshes LRU state.
    Way* lookup(Addr addr);
    bool contains(Addr addr) const;
    /// Installs a line, evicting the LRU way if the set is full. Returns the
    /// evicted line address, if any.
    std::optional<Addr> fill(Addr addr, const LineData& data, std::uint64_t beat_id = 0);
    /// Lookup that installs on miss; returns true on hit.
    bool access(Addr addr);

    const CacheConfig& config() const noexcept { return cfg_; }

  private:
    CacheConfig cfg_;
    std::vector<Way> ways_;
    std::uint64_t clock_ = 0;
};

// ---------------------------------------------------------------------------
// DMA engine

enum class DmaDirection : std::uint8_t { Read, Write };

struct DmaDescriptor {
    Addr base = 0;
    std::uint32_t len = 0;
    DmaDirection dir = DmaDirection::Read;
    /// Requesting port; buffers rotate over ports.
    std::uint32_t port = 0;
    std::uint64_t tag = 0;
};

/// Number of 64-byte beats a transfer touches: aligned lines spanned.
std::uint32_t dma_beats(Addr base, std::uint32_t len);

/// Buffer allocator of the DMA engine. Descriptors wait per port; each grant
/// takes one free buffer, ports served round-robin.
class DmaEngine {
  public:
    explicit DmaEngine(DmaEngineConfig cfg, std::uint32_t num_ports);

    /// ConfigError when desc.len exceeds the buffer size or is zero.
    void submit(const DmaDescriptor& desc);
    /// Grants at most one waiting descriptor a buffer.
    std::optional<DmaDescriptor> grant();
    void release();

    std::uint32_t free_buffers() const noexcept { return free_; }
    std::size_t waiting() const noexcept;
    const DmaEngineConfig& config() const noexcept { return cfg_; }

  private:
    DmaEngineConfig cfg_;
    std::vector<std::deque<DmaDescriptor>> queues_;
    std::uint32_t next_port_ = 0;
    std::uint32_t free_;
    std::size_t waiting_ = 0;
};

// ---------------------------------------------------------------------------
// Router

/// Round-robin arbiter over LMB ports plus the tag table that steers
/// responses back to their LMB.
class Router {
  public:
    explicit Router(std::uint32_t num_ports);

    /// Picks the first eligible port at or after the round-robin pointer and
    /// advances the pointer past it.
    std::optional<std::uint32_t> arbitrate(std::span<const bool> eligible);

    std::uint64_t register_beat(std::uint32_t port);
    /// Port owning `tag`; removes the tag. ProtocolError on unknown tags.
    std::uint32_t route_back(std::uint64_t tag);

    std::uint32_t num_ports() const noexcept { return num_ports_; }
    std::size_t outstanding() const noexcept { return owners_.size(); }

  private:
    std::uint32_t num_ports_;
    std::uint32_t next_ = 0;
    std::uint64_t next_tag_ = 1;
    std::unordered_map<std::uint64_t, std::uint32_t> owners_;
};

}  // namespace lmbsim
