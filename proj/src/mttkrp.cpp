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

#include "lmbsim/mttkrp.hpp"

#include <sstream>
#include <vector>

namespace lmbsim {

namespace {

std::uint32_t coord(const CooElement& e, int mode) { return mode == 0 ? e.i : (mode == 1 ? e.j : e.k); }

}  // namespace

FactorMatrix mttkrp_mode(const CooTensor& tensor, int mode, const FactorMatrix& f0, const FactorMatrix& f1,
                         const FactorMatrix& f2) {
    if (mode < 0 || mode > 2) throw ConfigError("mode must be 0, 1 or 2");
    const FactorMatrix* factors[3] = {&f0, &f1, &f2};
    const int ma = mode == 0 ? 1 : 0;
    const int mb = mode == 2 ? 1 : 2;
    const FactorMatrix& Fa = *factors[ma];
    const FactorMatrix& Fb = *factors[mb];

    if (Fa.cols() != Fb.cols()) throw ConfigError("factor matrices disagree on rank");
    if (static_cast<std::uint64_t>(Fa.rows()) < tensor.dim(ma) ||
        static_cast<std::uint64_t>(Fb.rows()) < tensor.dim(mb)) {
        std::ostringstream os;
        os << "factor matrices have " << Fa.rows() << " and " << Fb.rows() << " rows, tensor needs "
           << tensor.dim(ma) << " and " << tensor.dim(mb);
        throw ConfigError(os.str());
    }

    const auto rank = Fa.cols();
    const auto out_rows = static_cast<Eigen::Index>(tensor.dim(mode));
    using RowMajorD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajorD acc = RowMajorD::Zero(out_rows, rank);

    const auto& elems = tensor.elements();
    for (std::size_t z = 0; z < elems.size(); ++z) {
        const auto& e = elems[z];
        const auto row = coord(e, mode);
        const auto a = coord(e, ma);
        const auto b = coord(e, mb);
        if (row >= tensor.dim(mode) || a >= tensor.dim(ma) || b >= tensor.dim(mb)) {
            std::ostringstream os;
            os << "element " << z << " coordinate (" << e.i << ", " << e.j << ", " << e.k
               << ") out of range";
            throw DataError(os.str());
        }
        const double v = e.val;
        for (Eigen::Index r = 0; r < rank; ++r) {
            acc(row, r) += v * static_cast<double>(Fa(a, r)) * static_cast<double>(Fb(b, r));
        }
    }
    return acc.cast<float>();
}

FactorMatrix mttkrp_oracle(const CooTensor& tensor, const FactorMatrix& D, const FactorMatrix& C) {
    // f0 is unused for mode 0.
    return mttkrp_mode(tensor, 0, FactorMatrix(), D, C);
}

}  // namespace lmbsim
