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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lmbsim/tensor.hpp"

namespace lmbsim {

/// Reference mode-0 MTTKRP: A(i, r) = sum over nonzeros (i, j, k) of
/// val * D(j, r) * C(k, r), accumulated in double in element order.
/// The result has tensor.dim(0) rows.
FactorMatrix mttkrp_oracle(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C);

/// MTTKRP along any mode. `factors` holds the three factor matrices indexed
/// by mode; the entry for `mode` itself is ignored.
FactorMatrix mttkrp_mode(const CooTensor& tensor, int mode, const FactorMatrix& f0, const FactorMatrix& f1,
                         const FactorMatrix& f2);

/// Signature shared by every MTTKRP implementation a CP-ALS run may use.
using MttkrpFn = std::function<FactorMatrix(const CooTensor&, int mode, const FactorMatrix& f0,
                                            const FactorMatrix& f1, const FactorMatrix& f2)>;

/// Largest |a - b| / max(|b|, floor) over all entries; shapes must agree.
template <typename DerivedA, typename DerivedB>
double max_relative_error(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                          double floor = 1e-6) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const double x = static_cast<double>(a(r, c));
            const double y = static_cast<double>(b(r, c));
            worst = std::max(worst, std::abs(x - y) / std::max(std::abs(y), floor));
        }
    }
    return worst;
}

}  // namespace lmbsim
