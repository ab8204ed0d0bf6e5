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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "lmbsim/cp_als.hpp"
#include "lmbsim/mttkrp.hpp"
#include "lmbsim/rng.hpp"
#include "lmbsim/tensor_io.hpp"
#include "oracles.hpp"

using namespace lmbsim;

namespace {

CooTensor random_tensor(Dims dims, std::uint64_t nnz, std::uint64_t seed) {
    return gen_synthetic(GenSpec{dims, nnz, seed, Distribution::Uniform});
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lmbsim_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(CooTensor, ElementIsSixteenBytes) {
    static_assert(sizeof(CooElement) == 16);
    EXPECT_EQ(kElementBytes, 16U);
}

TEST(CooTensor, DensityAndSortedness) {
    CooTensor t({2, 2, 2}, {{0, 0, 0, 1.0f}, {1, 1, 1, 2.0f}});
    EXPECT_DOUBLE_EQ(t.density(), 2.0 / 8.0);
    EXPECT_TRUE(t.mode_sorted(0));
    CooTensor u({2, 2, 2}, {{1, 0, 0, 1.0f}, {0, 1, 1, 2.0f}});
    EXPECT_FALSE(u.mode_sorted(0));
    u.sort_lexicographic();
    EXPECT_TRUE(u.mode_sorted(0));
}

TEST(CooTensor, BoundsAndDuplicatesNameTheElement) {
    CooTensor bad({2, 2, 2}, {{0, 0, 0, 1.0f}, {0, 2, 0, 1.0f}});
    try {
        bad.check_bounds();
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
    CooTensor dup({2, 2, 2}, {{0, 0, 0, 1.0f}, {0, 0, 0, 2.0f}});
    EXPECT_THROW(dup.check_unique(), DataError);
}

TEST(GenSynthetic, ExactCountSortedUnique) {
    const auto t = random_tensor({16, 12, 9}, 300, 7);
    EXPECT_EQ(t.nnz(), 300U);
    EXPECT_TRUE(t.mode_sorted(0));
    EXPECT_NO_THROW(t.check_unique());
    EXPECT_NO_THROW(t.check_bounds());
    for (std::size_t z = 1; z < t.nnz(); ++z) {
        const auto& a = t[z - 1];
        const auto& b = t[z];
        EXPECT_TRUE(std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k));
    }
}

TEST(GenSynthetic, FullTensorAndEmptyTensor) {
    EXPECT_EQ(random_tensor({3, 3, 3}, 27, 1).nnz(), 27U);
    EXPECT_TRUE(random_tensor({8, 8, 8}, 0, 1).empty());
    EXPECT_THROW(random_tensor({2, 2, 2}, 9, 1), ConfigError);
}

TEST(GenSynthetic, Deterministic) {
    const auto a = random_tensor({100, 100, 100}, 500, 42);
    const auto b = random_tensor({100, 100, 100}, 500, 42);
    const auto c = random_tensor({100, 100, 100}, 500, 43);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a, c);
}

TEST(GenSynthetic, ModeClusteredStaysInLeadingSlices) {
    const auto t = gen_synthetic(GenSpec{{64, 32, 32}, 400, 5, Distribution::ModeClustered});
    EXPECT_EQ(t.nnz(), 400U);
    for (const auto& e : t.elements()) EXPECT_LT(e.i, 8U);
}

TEST(DatasetPreset, DensityTracksPublishedDatasets) {
    // Published densities of the two synthetic datasets.
    const auto s1 = dataset_preset("synth01-mini");
    const auto s2 = dataset_preset("synth02-mini");
    ASSERT_TRUE(s1 && s2);
    auto density = [](const GenSpec& g) {
        return static_cast<double>(g.nnz) /
               (static_cast<double>(g.dims[0]) * static_cast<double>(g.dims[1]) * static_cast<double>(g.dims[2]));
    };
    EXPECT_NEAR(density(*s1) / 2.37e-9, 1.0, 0.05);
    EXPECT_NEAR(density(*s2) / 9.05e-13, 1.0, 0.05);
    EXPECT_FALSE(dataset_preset("nope").has_value());
    const auto t = gen_synthetic(*s1);
    EXPECT_EQ(t.nnz(), s1->nnz);
}

TEST(TensorIo, TextRoundTripAndIndexConvention) {
    const auto t = random_tensor({9, 7, 5}, 60, 3);
    const auto path = temp_file("rt.tns");
    store_tensor(t, path, TensorFormat::Text);
    EXPECT_EQ(load_tensor(path, TensorFormat::Text), t);
    EXPECT_EQ(detect_tensor_format(path), TensorFormat::Text);

    {
        std::ofstream out(path);
        out << "# dims 2 2 2\n1 1 1 2.5\n";
    }
    const auto one = load_tensor(path, TensorFormat::Text);
    ASSERT_EQ(one.nnz(), 1U);
    EXPECT_EQ(one[0], (CooElement{0, 0, 0, 2.5f}));
    std::filesystem::remove(path);
}

TEST(TensorIo, BinaryRoundTripAndSize) {
    const auto t = random_tensor({30, 20, 10}, 123, 9);
    const auto path = temp_file("rt.bin");
    store_tensor(t, path, TensorFormat::Binary);
    EXPECT_EQ(std::filesystem::file_size(path), 32U + 16U * 123U);
    EXPECT_EQ(detect_tensor_format(path), TensorFormat::Binary);
    EXPECT_EQ(load_tensor(path, TensorFormat::Binary), t);
    std::filesystem::remove(path);
}

TEST(TensorIo, ErrorsCarryLocation) {
    const auto path = temp_file("bad.tns");
    {
        std::ofstream out(path);
        out << "# dims 2 2 2\n1 1 1 1.0\n1 x 1 2.0\n";
    }
    try {
        load_tensor(path, TensorFormat::Text);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    {
        std::ofstream out(path);
        out << "# dims 2 2 2\n3 1 1 1.0\n";
    }
    EXPECT_THROW(load_tensor(path, TensorFormat::Text), DataError);
    {
        std::ofstream out(path);
        out << "# dims 2 2 2\n1 1 1 1.0\n1 1 1 2.0\n";
    }
    EXPECT_THROW(load_tensor(path, TensorFormat::Text), DataError);

    const auto t = random_tensor({4, 4, 4}, 10, 1);
    store_tensor(t, path, TensorFormat::Binary);
    std::filesystem::resize_file(path, 32 + 16 * 10 - 5);
    try {
        load_tensor(path, TensorFormat::Binary);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("record 9"), std::string::npos) << e.what();
    }
    std::filesystem::remove(path);
}

TEST(Mttkrp, EmptyTensorGivesZeros) {
    CooTensor t({3, 2, 2}, {});
    const auto A = mttkrp_oracle(t, FactorMatrix::Ones(2, 4), FactorMatrix::Ones(2, 4));
    EXPECT_EQ(A.rows(), 3);
    EXPECT_EQ(A.cols(), 4);
    EXPECT_TRUE(A.isZero(0.0f));
}

TEST(Mttkrp, SingleElement) {
    CooTensor t({3, 1, 1}, {{0, 0, 0, 2.0f}});
    const auto A = mttkrp_oracle(t, FactorMatrix::Ones(1, 4), FactorMatrix::Ones(1, 4));
    EXPECT_TRUE(A.row(0).isApprox(Eigen::RowVector4f(2, 2, 2, 2)));
    EXPECT_TRUE(A.bottomRows(2).isZero(0.0f));
}

TEST(Mttkrp, MatchesDenseEvaluationExactly) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const Dims dims{1 + uniform_below(rng, 8), 1 + uniform_below(rng, 8), 1 + uniform_below(rng, 8)};
        const std::uint64_t nnz = uniform_below(rng, dims[0] * dims[1] * dims[2] + 1);
        const auto t = random_tensor(dims, nnz, 100 + trial);
        const auto R = static_cast<std::uint32_t>(1 + uniform_below(rng, 6));
        const auto D = random_factor(dims[1], R, trial * 2 + 1);
        const auto C = random_factor(dims[2], R, trial * 2 + 2);
        EXPECT_EQ(mttkrp_oracle(t, D, C), oracle::dense_mttkrp(t, D, C)) << "trial " << trial;
    }
}

TEST(Mttkrp, FourCubedExample) {
    const auto t = random_tensor({4, 4, 4}, 8, 77);
    const auto D = random_factor(4, 2, 1);
    const auto C = random_factor(4, 2, 2);
    EXPECT_EQ(mttkrp_oracle(t, D, C), oracle::dense_mttkrp(t, D, C));
}

TEST(Mttkrp, LinearInTheTensor) {
    const auto t = random_tensor({12, 10, 8}, 200, 4);
    const auto D = random_factor(10, 8, 1);
    const auto C = random_factor(8, 8, 2);
    const auto base = mttkrp_oracle(t, D, C);
    for (float alpha : {0.5f, 3.0f, -2.0f}) {
        const FactorMatrix scaled = mttkrp_oracle(t.scaled(alpha), D, C);
        EXPECT_LE(max_relative_error(scaled, FactorMatrix(alpha * base)), 1e-5);
    }
}

TEST(Mttkrp, ElementOrderOnlyReassociates) {
    const auto t = random_tensor({12, 10, 8}, 300, 5);
    auto elems = t.elements();
    std::mt19937_64 rng(3);
    std::shuffle(elems.begin(), elems.end(), rng);
    const CooTensor shuffled(t.dims(), elems);
    const auto D = random_factor(10, 8, 1);
    const auto C = random_factor(8, 8, 2);
    EXPECT_LE(max_relative_error(mttkrp_oracle(shuffled, D, C), mttkrp_oracle(t, D, C)), 1e-4);
}

TEST(Mttkrp, Errors) {
    const auto t = random_tensor({4, 4, 4}, 10, 1);
    EXPECT_THROW(mttkrp_oracle(t, FactorMatrix::Ones(4, 3), FactorMatrix::Ones(4, 2)), ConfigError);
    EXPECT_THROW(mttkrp_oracle(t, FactorMatrix::Ones(3, 2), FactorMatrix::Ones(4, 2)), ConfigError);
    CooTensor bad({4, 4, 4}, {{0, 0, 0, 1.0f}, {1, 0, 5, 1.0f}});
    try {
        mttkrp_oracle(bad, FactorMatrix::Ones(8, 2), FactorMatrix::Ones(8, 2));
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("element 1"), std::string::npos) << e.what();
    }
}

TEST(Mttkrp, OtherModesMatchDense) {
    // Mode-1 MTTKRP equals mode-0 MTTKRP of the tensor with i and j swapped.
    const auto t = random_tensor({5, 6, 7}, 40, 8);
    std::vector<CooElement> swapped;
    for (const auto& e : t.elements()) swapped.push_back({e.j, e.i, e.k, e.val});
    CooTensor u({6, 5, 7}, swapped);
    u.sort_lexicographic();
    const auto A = random_factor(5, 3, 1);
    const auto C = random_factor(7, 3, 2);
    const auto got = mttkrp_mode(t, 1, A, FactorMatrix(), C);
    EXPECT_LE(max_relative_error(got, oracle::dense_mttkrp(u, A, C)), 1e-6);
}

TEST(SolvePartialPivot, AgreesWithLu) {
    std::mt19937_64 rng(1);
    for (int n : {1, 2, 5, 16}) {
        Eigen::MatrixXd V(n, n), B(n, 3);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) V(r, c) = unit_double(rng) - 0.5;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < 3; ++c) B(r, c) = unit_double(rng);
        const Eigen::MatrixXd x = solve_partial_pivot(V, B);
        EXPECT_LE((V * x - B).norm(), 1e-9 * (1.0 + B.norm()));
    }
    Eigen::Matrix2d singular;
    singular << 1, 2, 2, 4;
    EXPECT_THROW(solve_partial_pivot(singular, Eigen::Matrix2d::Identity()), NumericalError);
}

namespace {

CooTensor rank_one_tensor(Dims dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> a(dims[0]), d(dims[1]), c(dims[2]);
    for (auto* v : {&a, &d, &c})
        for (auto& x : *v) x = 0.5 + unit_double(rng);
    std::vector<CooElement> e;
    for (std::uint32_t i = 0; i < dims[0]; ++i)
        for (std::uint32_t j = 0; j < dims[1]; ++j)
            for (std::uint32_t k = 0; k < dims[2]; ++k)
                e.push_back({i, j, k, static_cast<float>(a[i] * d[j] * c[k])});
    return CooTensor(dims, e);
}

}  // namespace

TEST(CpAls, RecoversRankOneTensor) {
    const auto t = rank_one_tensor({6, 5, 4}, 9);
    CpAlsOptions opt;
    opt.rank = 1;
    opt.max_iters = 25;
    const auto res = cp_als(t, opt);
    ASSERT_FALSE(res.fit_history.empty());
    EXPECT_GE(res.fit_history.back(), 0.999);
    EXPECT_LE(res.iterations, 25U);
    EXPECT_EQ(res.mttkrp_calls, 3U * res.iterations);
    EXPECT_NEAR(cp_fit(t, res.factors, res.lambda), res.fit_history.back(), 1e-9);
}

TEST(CpAls, ThreeMttkrpCallsPerIteration) {
    const auto t = random_tensor({8, 7, 6}, 60, 2);
    int calls = 0;
    CpAlsOptions opt;
    opt.rank = 3;
    opt.max_iters = 7;
    opt.tol = 0.0;
    opt.mttkrp = [&](const CooTensor& x, int mode, const FactorMatrix& a, const FactorMatrix& b,
                     const FactorMatrix& c) {
        ++calls;
        return mttkrp_mode(x, mode, a, b, c);
    };
    const auto res = cp_als(t, opt);
    EXPECT_EQ(res.iterations, 7U);
    EXPECT_EQ(calls, 21);
    EXPECT_EQ(res.mttkrp_calls, 21U);
}

TEST(CpAls, ZeroIterationsReturnsInitialFactors) {
    const auto t = random_tensor({5, 4, 3}, 20, 2);
    CpAlsOptions opt;
    opt.rank = 2;
    opt.max_iters = 0;
    opt.seed = 17;
    const auto res = cp_als(t, opt);
    EXPECT_EQ(res.factors[0], random_factor(5, 2, 17));
    EXPECT_EQ(res.factors[1], random_factor(4, 2, 18));
    EXPECT_EQ(res.factors[2], random_factor(3, 2, 19));
    EXPECT_EQ(res.iterations, 0U);
}

TEST(CpAls, FitFiniteOnRandomInputs) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto t = random_tensor({10, 9, 8}, 150, s);
        CpAlsOptions opt;
        opt.rank = 4;
        opt.max_iters = 10;
        opt.seed = s;
        const auto res = cp_als(t, opt);
        for (double f : res.fit_history) EXPECT_TRUE(std::isfinite(f));
    }
}

TEST(CpAls, WarnsWhenRankExceedsSmallestExtent) {
    const auto t = random_tensor({4, 4, 2}, 20, 1);
    CpAlsOptions opt;
    opt.rank = 3;
    opt.max_iters = 2;
    EXPECT_EQ(cp_als(t, opt).warnings, 1U);
    opt.rank = 0;
    EXPECT_THROW(cp_als(t, opt), ConfigError);
}

TEST(CpAls, SingularSystemNamesModeAndIteration) {
    // A zero MTTKRP zeroes the first factor, so the next mode's system vanishes.
    const auto t = random_tensor({4, 4, 4}, 20, 1);
    CpAlsOptions opt;
    opt.rank = 2;
    opt.max_iters = 3;
    opt.mttkrp = [](const CooTensor& x, int mode, const FactorMatrix&, const FactorMatrix&, const FactorMatrix&) {
        return FactorMatrix(FactorMatrix::Zero(static_cast<Eigen::Index>(x.dim(mode)), 2));
    };
    try {
        cp_als(t, opt);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("mode 1, iteration 0"), std::string::npos) << e.what();
    }
}
