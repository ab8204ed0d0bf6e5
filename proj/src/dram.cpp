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

#include "lmbsim/dram.hpp"

#include <bit>
#include <sstream>

namespace lmbsim {

void DramConfig::validate() const {
    if (data_width_bits != kBeatBytes * 8) throw ConfigError("dram.data_width_bits must be 512");
    if (num_banks == 0) throw ConfigError("dram.num_banks must be at least 1");
    if (row_bytes == 0 || row_bytes % kBeatBytes != 0) throw ConfigError("dram.row_bytes must be a multiple of 64");
    if (t_row_hit == 0 || t_row_miss == 0) throw ConfigError("dram latencies must be at least 1 cycle");
    if (queue_depth == 0) throw ConfigError("dram.queue_depth must be at least 1");
    if (address_bits == 0 || address_bits > 63) throw ConfigError("dram.address_bits must be in 1..63");
}

Dram::Dram(DramConfig cfg) : cfg_(cfg), banks_(cfg.num_banks) { cfg_.validate(); }

bool Dram::can_accept(Addr addr) const { return banks_[cfg_.bank_of(addr)].queue.size() < cfg_.queue_depth; }

bool Dram::enqueue(const DramBeat& beat, Cycle now) {
    if (beat.addr % kBeatBytes != 0) throw ProtocolError("dram beat address is not 64-byte aligned");
    if (beat.addr >> cfg_.address_bits) {
        std::ostringstream os;
        os << "dram beat address " << beat.addr << " exceeds the " << cfg_.address_bits << "-bit address space";
        throw ProtocolError(os.str());
    }
    auto& bank = banks_[cfg_.bank_of(beat.addr)];
    if (bank.queue.size() >= cfg_.queue_depth) return false;
    bank.queue.push_back(Pending{beat, now});
    ++in_flight_;
    return true;
}

std::optional<DramCompletion> Dram::retire(Cycle now) {
    for (auto& bank : banks_) {
        if (bank.active && bank.active->done <= now) {
            bank.finished.push_back(*bank.active);
            bank.active.reset();
        }
    }
    for (std::uint32_t n = 0; n < cfg_.num_banks; ++n) {
        const std::uint32_t b = (bus_next_ + n) % cfg_.num_banks;
        auto& fin = banks_[b].finished;
        if (fin.empty()) continue;
        DramCompletion c = fin.front();
        fin.pop_front();
        c.returned = now;
        bus_next_ = (b + 1) % cfg_.num_banks;
        --in_flight_;
        return c;
    }
    return std::nullopt;
}

void Dram::start(Cycle now) {
    for (auto& bank : banks_) {
        if (bank.active || bank.queue.empty()) continue;
        const Pending p = bank.queue.front();
        bank.queue.pop_front();
        const std::uint64_t row = cfg_.row_of(p.beat.addr);
        const bool hit = bank.open_row && *bank.open_row == row;
        const std::uint32_t latency = hit ? cfg_.t_row_hit : cfg_.t_row_miss;
        bank.open_row = row;
        (hit ? stats_.row_hits : stats_.row_misses)++;
        stats_.busy_cycles += latency;
        const std::uint64_t wait = now - p.arrival;
        const auto bucket = std::min<std::size_t>(std::bit_width(wait), DramStats::kWaitBuckets - 1);
        ++stats_.wait_histogram[bucket];
        bank.active = DramCompletion{p.beat, p.arrival, now, now + latency, 0, hit};
    }
}

bool Dram::idle() const noexcept { return in_flight_ == 0; }

std::vector<DramCompletion> dram_service(const DramConfig& cfg, std::span<const TimedBeat> beats) {
    Dram dram(cfg);
    std::vector<DramCompletion> out(beats.size());
    std::size_t next = 0;
    std::size_t done = 0;
    for (Cycle now = 0; done < beats.size(); ++now) {
        if (auto c = dram.retire(now)) {
            out[c->beat.token] = *c;
            ++done;
        }
        while (next < beats.size() && beats[next].arrival <= now) {
            DramBeat b = beats[next].beat;
            b.token = next;
            if (!dram.enqueue(b, now)) break;
            ++next;
        }
        dram.start(now);
    }
    return out;
}

}  // namespace lmbsim
