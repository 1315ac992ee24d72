/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include "mdaa/error.hpp"
#include "mdaa/linalg.hpp"
#include "mdaa/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace mdaa {
namespace {

using testing::naive_gram;
using testing::naive_product;
using testing::random_matrix;
using testing::random_spd;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no mdaa::Error thrown";
    return ErrorCode::Io;
}

TEST(SpdFactorTest, DiagonalFactor) {
    const SpdFactor f = spd_factorize(mat({{4, 0}, {0, 9}}));
    EXPECT_EQ(f.lower(), mat({{2, 0}, {0, 3}}));
    EXPECT_DOUBLE_EQ(f.min_pivot(), 4.0);
}

TEST(SpdFactorTest, IdentityFactor) {
    EXPECT_EQ(spd_factorize(Matrix::Identity(5, 5)).lower(), Matrix::Identity(5, 5));
}

TEST(SpdFactorTest, ReconstructsRandomGram) {
    std::mt19937_64 rng(11);
    for (Index n : {1, 3, 17, 64, 200}) {
        const Matrix p = random_spd(rng, n);
        const SpdFactor f = spd_factorize(p);
        EXPECT_LE(relative_frobenius(f.reconstruct(), p), 1e-10) << "n=" << n;
        const Matrix l = f.lower();
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) ASSERT_EQ(l(i, j), 0.0);
        EXPECT_LE(relative_frobenius(naive_product(l, l.transpose()), p), 1e-10);
    }
}

TEST(SpdFactorTest, ScaledIdentityAlwaysFactors) {
    for (double gamma : {1e-300, 1e-12, 1e-3, 1.0, 1e3, 1e300}) {
        EXPECT_NO_THROW(spd_factorize(gamma * Matrix::Identity(8, 8))) << gamma;
    }
}

TEST(SpdFactorTest, RejectsIndefiniteAndSingular) {
    EXPECT_EQ(code_of([] { spd_factorize(mat({{1, 2}, {2, 1}})); }), ErrorCode::NotPositiveDefinite);
    EXPECT_EQ(code_of([] { spd_factorize(mat({{-1}})); }), ErrorCode::NotPositiveDefinite);
    EXPECT_EQ(code_of([] { spd_factorize(mat({{1, 1}, {1, 1}})); }), ErrorCode::NotPositiveDefinite);
    EXPECT_EQ(code_of([] { spd_factorize(Matrix::Zero(3, 3)); }), ErrorCode::NotPositiveDefinite);
}

TEST(SpdFactorTest, RejectsBadShapesAndValues) {
    EXPECT_EQ(code_of([] { spd_factorize(Matrix::Zero(2, 3)); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { spd_factorize(mat({{2, 1}, {0, 2}})); }), ErrorCode::DimensionMismatch);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(code_of([&] { spd_factorize(mat({{1, nan}, {nan, 1}})); }), ErrorCode::NonFiniteInput);
}

TEST(SpdFactorTest, ToleratesRoundoffAsymmetry) {
    Matrix p = mat({{2, 1}, {1, 2}});
    p(0, 1) += 1e-14;
    EXPECT_NO_THROW(spd_factorize(p));
}

TEST(SpdSolveTest, IdentitySystem) {
    std::mt19937_64 rng(3);
    const Matrix q = random_matrix(rng, 6, 4);
    EXPECT_EQ(spd_solve(spd_factorize(Matrix::Identity(6, 6)), q), q);
}

TEST(SpdSolveTest, Scalar) {
    EXPECT_DOUBLE_EQ(spd_solve(spd_factorize(mat({{2}})), mat({{1}}))(0, 0), 0.5);
}

TEST(SpdSolveTest, ResidualOnRandomSystems) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 120);
        const Matrix p = random_spd(rng, n);
        const Matrix q = random_matrix(rng, n, 1 + static_cast<Index>(rng() % 12));
        const Matrix x = spd_solve(spd_factorize(p), q);
        EXPECT_LE(relative_frobenius(naive_product(p, x), q), 1e-10) << "n=" << n;
    }
}

TEST(SpdSolveTest, AgreesWithGaussianElimination) {
    std::mt19937_64 rng(8);
    const Matrix p = random_spd(rng, 40);
    const Matrix q = random_matrix(rng, 40, 5);
    EXPECT_LE(relative_frobenius(spd_solve(spd_factorize(p), q), gaussian_solve(p, q)), 1e-10);
}

TEST(SpdSolveTest, RejectsWrongRowCount) {
    const SpdFactor f = spd_factorize(Matrix::Identity(3, 3));
    EXPECT_EQ(code_of([&] { spd_solve(f, Matrix::Zero(4, 2)); }), ErrorCode::DimensionMismatch);
}

TEST(RankUpdateTest, SingleOuterProduct) {
    EXPECT_EQ(rank_k_update(Matrix::Zero(2, 2), mat({{1, 2}})), mat({{1, 2}, {2, 4}}));
}

TEST(RankUpdateTest, EmptyUpdate) {
    EXPECT_EQ(rank_k_update(Matrix::Identity(3, 3), Matrix(0, 3)), Matrix::Identity(3, 3));
}

TEST(RankUpdateTest, MatchesNaiveLoopAndStaysSymmetric) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 70);
        const Index k = static_cast<Index>(rng() % 40);
        const Matrix p = random_spd(rng, n);
        const Matrix x = random_matrix(rng, k, n);
        const Matrix got = rank_k_update(p, x);
        EXPECT_LE(relative_frobenius(got, p + naive_gram(x)), 1e-12);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < i; ++j) ASSERT_EQ(got(i, j), got(j, i));
    }
}

TEST(RankUpdateTest, Additivity) {
    std::mt19937_64 rng(17);
    const Matrix p = random_spd(rng, 30);
    const Matrix a = random_matrix(rng, 7, 30);
    const Matrix b = random_matrix(rng, 11, 30);
    Matrix ab(18, 30);
    ab << a, b;
    EXPECT_LE(relative_frobenius(rank_k_update(p, ab), rank_k_update(rank_k_update(p, a), b)), 1e-12);
}

TEST(RankUpdateTest, RejectsBadInput) {
    EXPECT_EQ(code_of([] { rank_k_update(Matrix::Zero(2, 2), Matrix::Zero(1, 3)); }), ErrorCode::DimensionMismatch);
    Matrix x = Matrix::Ones(1, 2);
    x(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_EQ(code_of([&] { rank_k_update(Matrix::Zero(2, 2), x); }), ErrorCode::NonFiniteInput);
}

TEST(CrossUpdateTest, SmallCase) {
    EXPECT_EQ(cross_update(Matrix::Zero(1, 2), mat({{1}, {0}}), mat({{1, 0}, {0, 1}})), mat({{1, 0}}));
}

TEST(CrossUpdateTest, EmptyUpdate) {
    const Matrix q = mat({{1, 2}, {3, 4}});
    EXPECT_EQ(cross_update(q, Matrix(0, 2), Matrix(0, 2)), q);
}

TEST(CrossUpdateTest, MatchesNaiveLoop) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 50);
        const Index c = 1 + static_cast<Index>(rng() % 10);
        const Index k = static_cast<Index>(rng() % 30);
        const Matrix q = random_matrix(rng, n, c);
        const Matrix x = random_matrix(rng, k, n);
        const Matrix y = random_matrix(rng, k, c);
        EXPECT_LE(relative_frobenius(cross_update(q, x, y), q + naive_product(x.transpose(), y), 1e-300), 1e-12);
    }
}

TEST(CrossUpdateTest, RejectsShapeMismatch) {
    EXPECT_EQ(code_of([] { cross_update(Matrix::Zero(2, 2), Matrix::Zero(1, 2), Matrix::Zero(2, 2)); }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { cross_update(Matrix::Zero(2, 2), Matrix::Zero(1, 3), Matrix::Zero(1, 2)); }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { cross_update(Matrix::Zero(2, 2), Matrix::Zero(1, 2), Matrix::Zero(1, 3)); }),
              ErrorCode::DimensionMismatch);
}

TEST(GaussianSolveTest, PivotsPastZeroDiagonal) {
    const Matrix x = gaussian_solve(mat({{0, 1}, {1, 0}}), mat({{3}, {5}}));
    EXPECT_EQ(x, mat({{5}, {3}}));
}

TEST(GaussianSolveTest, FlagsSingularSystem) {
    EXPECT_EQ(code_of([] { gaussian_solve(mat({{1, 2}, {2, 4}}), mat({{1}, {1}})); }),
              ErrorCode::NotPositiveDefinite);
}

}// namespace
}// namespace mdaa
