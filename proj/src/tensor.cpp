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

#include "lmbsim/tensor.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <tuple>
#include <sstream>
#include <unordered_set>

#include "lmbsim/rng.hpp"

namespace lmbsim {

CooTensor::CooTensor(Dims dims, std::vector<CooElement> elements)
    : dims_(dims), elements_(std::move(elements)) {}

double CooTensor::density() const {
    const double cells = static_cast<double>(dims_[0]) * static_cast<double>(dims_[1]) *
                         static_cast<double>(dims_[2]);
    return cells > 0.0 ? static_cast<double>(nnz()) / cells : 0.0;
}

bool CooTensor::mode_sorted(int mode) const {
    auto coord = [mode](const CooElement& e) {
        return mode == 0 ? e.i : (mode == 1 ? e.j : e.k);
    };
    for (std::size_t z = 1; z < elements_.size(); ++z) {
        if (coord(elements_[z]) < coord(elements_[z - 1])) return false;
    }
    return true;
}

void CooTensor::check_bounds() const {
    for (std::size_t z = 0; z < elements_.size(); ++z) {
        const auto& e = elements_[z];
        if (e.i >= dims_[0] || e.j >= dims_[1] || e.k >= dims_[2]) {
            std::ostringstream os;
            os << "element " << z << " coordinate (" << e.i << ", " << e.j << ", " << e.k
               << ") out of range for dims " << dims_[0] << "x" << dims_[1] << "x" << dims_[2];
            throw DataError(os.str());
        }
    }
}

void CooTensor::check_unique() const {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(elements_.size() * 2);
    // Exact key: bounds are checked first so the linear index cannot alias.
    check_bounds();
    for (std::size_t z = 0; z < elements_.size(); ++z) {
        const auto& e = elements_[z];
        const std::uint64_t key = (static_cast<std::uint64_t>(e.i) * dims_[1] + e.j) * dims_[2] + e.k;
        if (!seen.insert(key).second) {
            std::ostringstream os;
            os << "element " << z << " duplicates coordinate (" << e.i << ", " << e.j << ", " << e.k
               << ")";
            throw DataError(os.str());
        }
    }
}

void CooTensor::sort_lexicographic() {
    std::sort(elements_.begin(), elements_.end(), [](const CooElement& a, const CooElement& b) {
        return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
}

CooTensor CooTensor::scaled(float alpha) const {
    auto out = elements_;
    for (auto& e : out) e.val *= alpha;
    return CooTensor(dims_, std::move(out));
}

std::uint64_t CooTensor::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v, int bytes) {
        for (int b = 0; b < bytes; ++b) {
            h ^= (v >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (auto d : dims_) mix(d, 8);
    for (const auto& e : elements_) {
        mix(e.i, 4);
        mix(e.j, 4);
        mix(e.k, 4);
        mix(std::bit_cast<std::uint32_t>(e.val), 4);
    }
    return h;
}

std::string_view to_string(Distribution d) {
    return d == Distribution::Uniform ? "uniform" : "mode-clustered";
}

Distribution distribution_from_string(std::string_view s) {
    if (s == "uniform") return Distribution::Uniform;
    if (s == "mode-clustered" || s == "clustered") return Distribution::ModeClustered;
    throw ConfigError("unknown distribution '" + std::string(s) + "'");
}

namespace {

// a * b, or nullopt on 64-bit overflow.
std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
    return r;
}

}  // namespace

CooTensor gen_synthetic(const GenSpec& spec) {
    const auto [I, J, K] = spec.dims;
    constexpr std::uint64_t kMaxExtent = std::uint64_t{1} << 32;
    if (I > kMaxExtent || J > kMaxExtent || K > kMaxExtent) {
        throw ConfigError("tensor extents must fit 32-bit coordinates");
    }
    if (spec.nnz == 0) return CooTensor(spec.dims, {});

    const auto plane = checked_mul(J, K);
    const auto cells = plane ? checked_mul(I, *plane) : std::nullopt;
    if (!cells) throw ConfigError("tensor cell count overflows 64 bits");
    if (spec.nnz > *cells) {
        std::ostringstream os;
        os << "nnz " << spec.nnz << " exceeds the " << *cells << " cells of the tensor";
        throw ConfigError(os.str());
    }

    // Mode-clustered tensors put every nonzero into the leading eighth of the
    // mode-0 slices (or as many slices as nnz needs), so output rows are long.
    std::uint64_t slices = I;
    if (spec.distribution == Distribution::ModeClustered) {
        const std::uint64_t needed = (spec.nnz + *plane - 1) / *plane;
        slices = std::min(I, std::max((I + 7) / 8, needed));
    }
    const std::uint64_t space = slices * *plane;

    // Floyd's sampling: exactly nnz distinct linear indices, uniform over the space.
    std::mt19937_64 rng(spec.seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(spec.nnz) * 2);
    for (std::uint64_t t = space - spec.nnz; t < space; ++t) {
        const std::uint64_t r = uniform_below(rng, t + 1);
        if (!chosen.insert(r).second) chosen.insert(t);
    }
    std::vector<std::uint64_t> linear(chosen.begin(), chosen.end());
    std::sort(linear.begin(), linear.end());

    std::vector<CooElement> elements;
    elements.reserve(linear.size());
    for (const auto idx : linear) {
        CooElement e;
        e.i = static_cast<std::uint32_t>(idx / *plane);
        e.j = static_cast<std::uint32_t>((idx % *plane) / K);
        e.k = static_cast<std::uint32_t>(idx % K);
        elements.push_back(e);
    }
    // Values drawn after the coordinates are fixed and sorted, so the value of
    // the z-th element depends only on the seed and z.
    for (auto& e : elements) e.val = unit_float(rng) + 0.5f;
    return CooTensor(spec.dims, std::move(elements));
}

std::optional<GenSpec> dataset_preset(std::string_view name) {
    // Full-scale extents use binary K/M prefixes. Desk scale divides nnz and
    // the cell count by 1024 (halving the largest extent ten times), which
    // keeps the density of the full-size dataset.
    constexpr std::uint64_t Ki = 1024;
    constexpr std::uint64_t Mi = 1024 * 1024;
    GenSpec spec;
    if (name == "synth01-mini") {
        spec.dims = {22 * Ki, 22 * Ki, 23 * Mi / 1024};
        spec.nnz = 28 * Mi / 1024;
        spec.seed = 101;
        return spec;
    }
    if (name == "synth02-mini") {
        Dims d{3 * Mi, 2 * Mi, 25 * Mi};
        for (int step = 0; step < 10; ++step) {
            auto largest = std::max_element(d.begin(), d.end());
            *largest /= 2;
        }
        spec.dims = d;
        spec.nnz = 144 * Mi / 1024;
        spec.seed = 202;
        return spec;
    }
    return std::nullopt;
}

std::vector<std::string> dataset_preset_names() { return {"synth01-mini", "synth02-mini"}; }

FactorMatrix random_factor(std::uint64_t rows, std::uint32_t rank, std::uint64_t seed) {
    FactorMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rank));
    std::mt19937_64 rng(seed);
    float* data = m.data();
    for (Eigen::Index n = 0; n < m.size(); ++n) data[n] = unit_float(rng);
    return m;
}

}  // namespace lmbsim
