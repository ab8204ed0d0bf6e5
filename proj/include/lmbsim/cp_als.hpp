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
#include <sstream>
#include <vector>

#include "lmbsim/mttkrp.hpp"

namespace lmbsim {

/// Solves V * X = B by Gaussian elimination with partial pivoting.
/// Throws NumericalError when a pivot vanishes relative to the largest entry of V.
template <typename DerivedV, typename DerivedB>
Eigen::Matrix<typename DerivedV::Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_partial_pivot(
    const Eigen::MatrixBase<DerivedV>& V, const Eigen::MatrixBase<DerivedB>& B) {
    using Scalar = typename DerivedV::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = V.rows();
    if (V.cols() != n || B.rows() != n) throw ConfigError("solve_partial_pivot: shape mismatch");

    Mat a = V;
    Mat x = B.template cast<Scalar>();
    const Scalar scale = n > 0 ? a.cwiseAbs().maxCoeff() : Scalar(0);
    const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(n) * scale;

    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        a.col(col).tail(n - col).cwiseAbs().maxCoeff(&pivot);
        pivot += col;
        if (!(std::abs(a(pivot, col)) > tiny)) {
            std::ostringstream os;
            os << "singular normal-equations matrix (pivot " << col << ")";
            throw NumericalError(os.str());
        }
        if (pivot != col) {
            a.row(col).swap(a.row(pivot));
            x.row(col).swap(x.row(pivot));
        }
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const Scalar f = a(r, col) / a(col, col);
            if (f == Scalar(0)) continue;
            a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
            x.row(r) -= f * x.row(col);
        }
    }
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        x.row(r) -= a.row(r).tail(n - r - 1) * x.bottomRows(n - r - 1);
        x.row(r) /= a(r, r);
    }
    return x;
}

struct CpAlsOptions {
    std::uint32_t rank = 8;
    std::uint32_t max_iters = 50;
    /// Stop once |fit_t - fit_{t-1}| falls below this.
    double tol = 1e-6;
    std::uint64_t seed = 1;
    /// MTTKRP implementation; empty means mttkrp_mode.
    MttkrpFn mttkrp;
};

struct CpAlsResult {
    /// Indexed by mode: A (rows I), D (rows J), C (rows K).
    std::array<FactorMatrix, 3> factors;
    /// Column 2-norms removed by normalization.
    Eigen::VectorXd lambda;
    std::vector<double> fit_history;
    std::uint32_t iterations = 0;
    std::uint64_t mttkrp_calls = 0;
    /// Incremented when rank exceeds the smallest tensor extent.
    std::uint32_t warnings = 0;
    bool converged = false;
};

CpAlsResult cp_als(const CooTensor& tensor, const CpAlsOptions& options);

/// 1 - ||X - Xhat|| / ||X|| for the Kruskal tensor (lambda; A, D, C).
double cp_fit(const CooTensor& tensor, const std::array<FactorMatrix, 3>& factors,
              const Eigen::VectorXd& lambda);

}  // namespace lmbsim
