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

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmbsim/common.hpp"

namespace lmbsim {

/// One nonzero of a third-order tensor. Serialized as 16 bytes: three u32
/// coordinates followed by an f32 value.
struct CooElement {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t k = 0;
    float val = 0.0f;

    friend bool operator==(const CooElement&, const CooElement&) = default;
};

inline constexpr std::size_t kElementBytes = 16;

using Dims = std::array<std::uint64_t, 3>;

/// Sparse 3-D tensor in coordinate format.
class CooTensor {
  public:
    CooTensor() = default;
    CooTensor(Dims dims, std::vector<CooElement> elements);

    const Dims& dims() const noexcept { return dims_; }
    std::uint64_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
    std::uint64_t nnz() const noexcept { return elements_.size(); }
    bool empty() const noexcept { return elements_.empty(); }

    const std::vector<CooElement>& elements() const noexcept { return elements_; }
    const CooElement& operator[](std::size_t z) const { return elements_[z]; }

    /// nnz / (I*J*K), computed in floating point.
    double density() const;

    /// True when the first coordinate is non-decreasing along the element order.
    bool mode_sorted(int mode) const;

    /// Throws DataError if any coordinate is out of range, naming the element.
    void check_bounds() const;
    /// Throws DataError naming the first duplicated coordinate.
    void check_unique() const;

    /// Sorts lexicographically by (i, j, k).
    void sort_lexicographic();

    /// Multiplies every value by `alpha`.
    CooTensor scaled(float alpha) const;

    /// FNV-1a digest over dims and element bytes; identifies a tensor across runs.
    std::uint64_t fingerprint() const;

    friend bool operator==(const CooTensor&, const CooTensor&) = default;

  private:
    Dims dims_{0, 0, 0};
    std::vector<CooElement> elements_;
};

/// Dense row-major factor matrix; one row is one fiber of `rank` f32 values.
using FactorMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Distribution { Uniform, ModeClustered };

std::string_view to_string(Distribution d);
Distribution distribution_from_string(std::string_view s);

/// Parameters for a synthetic tensor.
struct GenSpec {
    Dims dims{0, 0, 0};
    std::uint64_t nnz = 0;
    std::uint64_t seed = 1;
    Distribution distribution = Distribution::Uniform;
};

/// Duplicate-free tensor with exactly spec.nnz elements, sorted by (i, j, k).
/// Reproducible from spec.seed on every platform.
CooTensor gen_synthetic(const GenSpec& spec);

/// Desk-scale dataset presets: `synth01-mini`, `synth02-mini`.
std::optional<GenSpec> dataset_preset(std::string_view name);
std::vector<std::string> dataset_preset_names();

/// Factor matrix with entries drawn uniformly from [0, 1), reproducible from seed.
FactorMatrix random_factor(std::uint64_t rows, std::uint32_t rank, std::uint64_t seed);

}  // namespace lmbsim
