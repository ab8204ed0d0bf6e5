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

#include "lmbsim/cp_als.hpp"

#include <algorithm>
#include <cmath>

namespace lmbsim {

namespace {

Eigen::MatrixXd gram(const FactorMatrix& f) {
    const Eigen::MatrixXd d = f.cast<double>();
    return d.transpose() * d;
}

// Scales each column to unit 2-norm; returns the norms.
Eigen::VectorXd normalize_columns(FactorMatrix& f) {
    Eigen::VectorXd norms(f.cols());
    for (Eigen::Index r = 0; r < f.cols(); ++r) {
        const double n = f.col(r).cast<double>().norm();
        norms(r) = n;
        if (n > 0.0) f.col(r) = (f.col(r).cast<double>() / n).cast<float>();
    }
    return norms;
}

}  // namespace

double cp_fit(const CooTensor& tensor, const std::array<FactorMatrix, 3>& factors,
              const Eigen::VectorXd& lambda) {
    const auto& [A, D, C] = factors;
    double norm_x2 = 0.0;
    double inner = 0.0;
    for (const auto& e : tensor.elements()) {
        norm_x2 += static_cast<double>(e.val) * e.val;
        double s = 0.0;
        for (Eigen::Index r = 0; r < lambda.size(); ++r) {
            s += lambda(r) * static_cast<double>(A(e.i, r)) * D(e.j, r) * C(e.k, r);
        }
        inner += e.val * s;
    }
    const Eigen::MatrixXd had = gram(A).cwiseProduct(gram(D)).cwiseProduct(gram(C));
    const double norm_model2 = lambda.dot(had * lambda);
    const double resid2 = std::max(0.0, norm_x2 + norm_model2 - 2.0 * inner);
    return norm_x2 > 0.0 ? 1.0 - std::sqrt(resid2) / std::sqrt(norm_x2) : 0.0;
}

CpAlsResult cp_als(const CooTensor& tensor, const CpAlsOptions& options) {
    if (options.rank == 0) throw ConfigError("cp_als: rank must be at least 1");
    if (tensor.empty()) throw PreconditionError("cp_als: tensor has no nonzeros");

    CpAlsResult out;
    const auto& dims = tensor.dims();
    if (options.rank > *std::min_element(dims.begin(), dims.end())) ++out.warnings;

    for (int m = 0; m < 3; ++m) {
        out.factors[m] = random_factor(dims[m], options.rank, options.seed + static_cast<std::uint64_t>(m));
    }
    out.lambda = Eigen::VectorXd::Ones(options.rank);

    MttkrpFn mttkrp = options.mttkrp ? options.mttkrp : MttkrpFn(mttkrp_mode);
    double prev_fit = 0.0;
    for (std::uint32_t it = 0; it < options.max_iters; ++it) {
        for (int mode = 0; mode < 3; ++mode) {
            const FactorMatrix M = mttkrp(tensor, mode, out.factors[0], out.factors[1], out.factors[2]);
            ++out.mttkrp_calls;
            const int a = mode == 0 ? 1 : 0;
            const int b = mode == 2 ? 1 : 2;
            const Eigen::MatrixXd V = gram(out.factors[a]).cwiseProduct(gram(out.factors[b]));
            // Factor = M V^-1; V is symmetric, so solve V Factor^T = M^T.
            Eigen::MatrixXd solved;
            try {
                solved = solve_partial_pivot(V, M.cast<double>().transpose());
            } catch (const NumericalError& e) {
                std::ostringstream os;
                os << e.what() << " in mode " << mode << ", iteration " << it;
                throw NumericalError(os.str());
            }
            out.factors[mode] = solved.transpose().cast<float>();
        }
        out.lambda = Eigen::VectorXd::Ones(options.rank);
        for (auto& f : out.factors) out.lambda = out.lambda.cwiseProduct(normalize_columns(f));

        const double fit = cp_fit(tensor, out.factors, out.lambda);
        out.fit_history.push_back(fit);
        out.iterations = it + 1;
        if (it > 0 && std::abs(fit - prev_fit) < options.tol) {
            out.converged = true;
            break;
        }
        prev_fit = fit;
    }
    return out;
}

}  // namespace lmbsim
