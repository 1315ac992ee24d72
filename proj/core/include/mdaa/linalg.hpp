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
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>

namespace mdaa {

/// Dense row-major double matrix. Feature batches keep one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Cholesky factor L of a symmetric positive definite matrix, m = L Lᵀ.
class SpdFactor {
public:
    Index dimension() const { return llt_.rows(); }

    /// Lower-triangular factor with the strict upper part zeroed.
    Matrix lower() const;

    /// L Lᵀ.
    Matrix reconstruct() const;

    /// Smallest pivot (squared diagonal of L).
    double min_pivot() const { return min_pivot_; }

private:
    friend SpdFactor spd_factorize(const Matrix& m);
    friend Matrix spd_solve(const SpdFactor& f, const Matrix& rhs);

    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt_;
    double min_pivot_ = 0.0;
};

/// Factorizes a symmetric positive definite matrix.
///
/// Throws NotPositiveDefinite when a pivot is non-finite or not above
/// dimension·ε·max(diag) (numerically singular), NonFiniteInput for NaN/Inf
/// entries, DimensionMismatch for a non-square or visibly asymmetric input
/// (relative tolerance 1e-9).
SpdFactor spd_factorize(const Matrix& m);

/// Solves (L Lᵀ) X = rhs by forward and back substitution.
Matrix spd_solve(const SpdFactor& f, const Matrix& rhs);

/// p + xᵀx. Only the lower triangle is computed; the upper one is a mirror,
/// so the result is symmetric bit for bit.
Matrix rank_k_update(const Matrix& p, const Matrix& x);
void rank_k_update_in_place(Matrix& p, const Matrix& x);

/// q + xᵀy.
Matrix cross_update(const Matrix& q, const Matrix& x, const Matrix& y);
void cross_update_in_place(Matrix& q, const Matrix& x, const Matrix& y);

/// Copies the strict lower triangle onto the strict upper triangle.
void mirror_lower(Matrix& m);

bool all_finite(const Matrix& m);

/// ‖a − b‖_F / max(‖b‖_F, floor).
double relative_frobenius(const Matrix& a, const Matrix& b, double floor = 0.0);

}// namespace mdaa
