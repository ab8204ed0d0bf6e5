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

#include "lmbsim/fabric.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace lmbsim {

std::string_view to_string(RequestKind k) {
    switch (k) {
        case RequestKind::CacheLineRead: return "CacheLineRead";
        case RequestKind::DmaRead: return "DmaRead";
        case RequestKind::DmaWrite: return "DmaWrite";
    }
    return "?";
}

std::string_view to_string(FabricType t) { return t == FabricType::Type1 ? "Type1" : "Type2"; }

FabricType fabric_type_from_string(std::string_view s) {
    if (s == "Type1" || s == "type1" || s == "1") return FabricType::Type1;
    if (s == "Type2" || s == "type2" || s == "2") return FabricType::Type2;
    throw ConfigError("unknown fabric type '" + std::string(s) + "'");
}

std::uint64_t RequestTrace::count(RequestKind kind) const {
    return static_cast<std::uint64_t>(std::count_if(ops.begin(), ops.end(), [kind](const TraceOp& op) {
        return is_memory_op(op.kind) && op.request.kind == kind;
    }));
}

std::uint64_t RequestTrace::count_port(RequestKind kind, std::uint32_t port) const {
    return static_cast<std::uint64_t>(std::count_if(ops.begin(), ops.end(), [&](const TraceOp& op) {
        return is_memory_op(op.kind) && op.request.kind == kind && op.port == port;
    }));
}

void RequestTrace::dump(std::ostream& os) const {
    for (const auto& op : ops) {
        if (!is_memory_op(op.kind)) continue;
        const auto& r = op.request;
        os << r.issue_cycle << ' ' << to_string(r.kind) << ' ' << r.lmb_id << ' ' << r.pe_id << ' ' << r.addr
           << ' ' << r.len << ' ' << r.tag << '\n';
    }
}

void FabricConfig::validate() const {
    if (pe_count == 0) throw ConfigError("fabric.pe_count must be at least 1");
    if (max_outstanding_per_pe == 0) throw ConfigError("fabric.max_outstanding_per_pe must be at least 1");
}

std::vector<Partition> partition_nonzeros(std::span<const std::uint32_t> rows, std::uint32_t p) {
    if (p == 0) throw ConfigError("partition count must be at least 1");
    const std::uint64_t m = rows.size();
    const std::uint64_t base = m / p;
    const std::uint64_t extra = m % p;

    std::vector<Partition> parts;
    parts.reserve(p);
    std::uint64_t begin = 0;
    for (std::uint32_t q = 0; q < p; ++q) {
        std::uint64_t end = q + 1 == p ? m : (q + 1) * base + std::min<std::uint64_t>(q + 1, extra);
        end = std::max(end, begin);
        while (end > 0 && end < m && rows[end] == rows[end - 1]) ++end;
        parts.emplace_back(begin, end);
        begin = end;
    }
    return parts;
}

std::vector<Partition> partition_nonzeros(const CooTensor& tensor, std::uint32_t p) {
    std::vector<std::uint32_t> rows;
    rows.reserve(tensor.nnz());
    for (const auto& e : tensor.elements()) rows.push_back(e.i);
    return partition_nonzeros(rows, p);
}

namespace {

struct PortBinding {
    std::uint32_t element_port;
    std::uint32_t fiber_port;
    std::uint32_t write_port;
    std::uint32_t lane;
    std::uint32_t lmb;
    // pe_id reported on each request is the issuing port.
};

class TraceBuilder {
  public:
    TraceBuilder(RequestTrace& trace, const AddressMap& map) : trace_(trace), map_(map) {}

    std::uint32_t add(TraceOp op) {
        const auto index = static_cast<std::uint32_t>(trace_.ops.size());
        if (is_memory_op(op.kind)) {
            op.request.kind = request_kind_of(op.kind);
            op.request.pe_id = op.port;
            op.request.tag = index;
            trace_.port_program[op.port].push_back(index);
        } else {
            trace_.lane_program[op.lane].push_back(index);
        }
        trace_.ops.push_back(op);
        return index;
    }

    // Emits one partition and accumulates its rows into `out`.
    void emit_partition(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C, Partition part,
                        const PortBinding& bind, FactorMatrix& out) {
        const auto rank = static_cast<Eigen::Index>(map_.rank);
        const std::uint32_t fiber_len = static_cast<std::uint32_t>(map_.row_bytes());
        Eigen::Matrix<double, 1, Eigen::Dynamic> temp_y = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(rank);

        std::int64_t pending_write = -1;   // flush op the next row's first accumulate must follow
        std::int64_t last_accumulate = -1;
        std::int64_t last_write_op = -1;   // write waiting for the next element read
        std::uint64_t seq = 0;
        const auto& elems = tensor.elements();

        for (std::uint64_t z = part.first; z < part.second; ++z, ++seq) {
            const auto& e = elems[z];
            const bool new_row = z == part.first || e.i != elems[z - 1].i;

            TraceOp read_e;
            read_e.kind = OpKind::ReadElement;
            read_e.port = bind.element_port;
            read_e.lane = bind.lane;
            read_e.element = z;
            read_e.row = e.i;
            read_e.lane_seq = seq;
            read_e.request.addr = map_.address_of_element(z);
            read_e.request.len = AddressMap::element_size;
            read_e.request.lmb_id = bind.lmb;
            const auto ie = add(read_e);

            // Algorithm needs the next element's row id before flushing.
            if (last_write_op >= 0) {
                trace_.ops[static_cast<std::size_t>(last_write_op)].deps[1] = Dep{ie, false};
                last_write_op = -1;
            }

            TraceOp fiber = read_e;
            fiber.kind = OpKind::ReadFiberD;
            fiber.port = bind.fiber_port;
            fiber.request.addr = map_.address_of_row(Segment::MatD, e.j);
            fiber.request.len = fiber_len;
            fiber.deps = {Dep{ie, false}, Dep{}, Dep{}};
            const auto id = add(fiber);
            fiber.kind = OpKind::ReadFiberC;
            fiber.request.addr = map_.address_of_row(Segment::MatC, e.k);
            const auto ic = add(fiber);

            TraceOp acc;
            acc.kind = OpKind::Accumulate;
            acc.lane = bind.lane;
            acc.port = bind.fiber_port;
            acc.element = z;
            acc.row = e.i;
            acc.lane_seq = seq;
            acc.deps = {Dep{id, false}, Dep{ic, false}, Dep{}};
            if (new_row && pending_write >= 0) acc.deps[2] = Dep{pending_write, true};
            last_accumulate = add(acc);

            if (new_row) temp_y.setZero();
            const double v = e.val;
            for (Eigen::Index r = 0; r < rank; ++r) {
                temp_y(r) += v * static_cast<double>(D(e.j, r)) * static_cast<double>(C(e.k, r));
            }

            const bool row_ends = z + 1 == part.second || elems[z + 1].i != e.i;
            if (row_ends) {
                out.row(e.i) = temp_y.cast<float>();
                TraceOp write;
                write.kind = OpKind::WriteRow;
                write.port = bind.write_port;
                write.lane = bind.lane;
                write.element = z;
                write.row = e.i;
                write.lane_seq = seq;
                write.request.addr = map_.address_of_row(Segment::MatOut, e.i);
                write.request.len = fiber_len;
                write.request.lmb_id = bind.lmb;
                write.deps = {Dep{last_accumulate, false}, Dep{}, Dep{}};
                pending_write = add(write);
                if (z + 1 != part.second) last_write_op = pending_write;
            }
        }
    }

  private:
    RequestTrace& trace_;
    const AddressMap& map_;
};

void check_inputs(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C, const AddressMap& map) {
    if (!tensor.mode_sorted(0)) {
        throw PreconditionError("fabric models need a tensor sorted by its first coordinate");
    }
    if (D.cols() != C.cols() || static_cast<std::uint32_t>(D.cols()) != map.rank) {
        throw ConfigError("factor matrices disagree with the address map rank");
    }
    if (static_cast<std::uint64_t>(D.rows()) < tensor.dim(1) || static_cast<std::uint64_t>(C.rows()) < tensor.dim(2)) {
        throw ConfigError("factor matrices have fewer rows than the tensor extents");
    }
    if (map.nnz != tensor.nnz()) throw ConfigError("address map was built for a different tensor");
    tensor.check_bounds();
}

RequestTrace empty_trace(FabricType type, std::uint32_t rank, std::uint32_t ports, std::uint32_t lanes) {
    RequestTrace t;
    t.fabric = type;
    t.rank = rank;
    t.num_ports = ports;
    t.num_lanes = lanes;
    t.port_program.resize(ports);
    t.lane_program.resize(lanes);
    return t;
}

}  // namespace

FabricRun run_type2_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                               const FabricConfig& fabric, const AddressMap& map,
                               std::span<const std::uint32_t> pe_to_lmb) {
    fabric.validate();
    if (fabric.fabric_type != FabricType::Type2) throw ConfigError("run_type2_functional needs a Type2 fabric");
    check_inputs(tensor, D, C, map);
    if (!pe_to_lmb.empty() && pe_to_lmb.size() != fabric.pe_count) {
        throw ConfigError("pe_to_lmb must name one LMB per PE");
    }

    FabricRun run;
    run.output = FactorMatrix::Zero(static_cast<Eigen::Index>(tensor.dim(0)), map.rank);
    run.trace = empty_trace(FabricType::Type2, map.rank, fabric.pe_count, fabric.pe_count);
    run.trace.ops.reserve(tensor.nnz() * 5);

    TraceBuilder builder(run.trace, map);
    const auto parts = partition_nonzeros(tensor, fabric.pe_count);
    for (std::uint32_t q = 0; q < fabric.pe_count; ++q) {
        const std::uint32_t lmb = pe_to_lmb.empty() ? 0 : pe_to_lmb[q];
        builder.emit_partition(tensor, D, C, parts[q], PortBinding{q, q, q, q, lmb}, run.output);
    }
    return run;
}

FabricRun run_type1_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                               const FabricConfig& fabric, const AddressMap& map) {
    fabric.validate();
    if (fabric.fabric_type != FabricType::Type1) throw ConfigError("run_type1_functional needs a Type1 fabric");
    check_inputs(tensor, D, C, map);

    FabricRun run;
    run.output = FactorMatrix::Zero(static_cast<Eigen::Index>(tensor.dim(0)), map.rank);
    run.trace = empty_trace(FabricType::Type1, map.rank, 3, 1);
    run.trace.ops.reserve(tensor.nnz() * 5);

    TraceBuilder builder(run.trace, map);
    builder.emit_partition(tensor, D, C, Partition{0, tensor.nnz()},
                           PortBinding{kTensorLoadUnit, kMatrixLoadUnit, kMatrixStoreUnit, 0, 0}, run.output);
    return run;
}

FabricRun run_functional(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C,
                         const FabricConfig& fabric, const AddressMap& map,
                         std::span<const std::uint32_t> pe_to_lmb) {
    if (fabric.fabric_type == FabricType::Type1) return run_type1_functional(tensor, D, C, fabric, map);
    return run_type2_functional(tensor, D, C, fabric, map, pe_to_lmb);
}

}  // namespace lmbsim
