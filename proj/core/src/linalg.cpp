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
#include "mdaa/linalg.hpp"

#include "mdaa/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mdaa {

namespace {

void require_finite(const Matrix& m, const char* what) {
    require(all_finite(m), ErrorCode::NonFiniteInput, std::string(what) + " contains NaN or Inf");
}

}// namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void mirror_lower(Matrix& m) {
    const Index n = m.rows();
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            m(i, j) = m(j, i);
        }
    }
}

double relative_frobenius(const Matrix& a, const Matrix& b, double floor) {
    const double denom = std::max(b.norm(), floor);
    const double num = (a - b).norm();
    if (denom == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / denom;
}

Matrix SpdFactor::lower() const {
    Matrix l = llt_.matrixL();
    return l;
}

Matrix SpdFactor::reconstruct() const {
    Matrix r = llt_.reconstructedMatrix();
    return r;
}

SpdFactor spd_factorize(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch,
            "spd_factorize expects a square matrix, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    require_finite(m, "spd_factorize input");
    const Index n = m.rows();
    require(n > 0, ErrorCode::DimensionMismatch, "spd_factorize on an empty matrix");

    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-9 * scale, ErrorCode::DimensionMismatch, "spd_factorize input is not symmetric");

    SpdFactor f;
    f.llt_.compute(m);
    if (f.llt_.info() != Eigen::Success) {
        fail(ErrorCode::NotPositiveDefinite, "non-positive pivot during Cholesky factorization");
    }
    const auto& l = f.llt_.matrixLLT();
    const double max_diag = m.diagonal().maxCoeff();
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
        const double pivot = l(k, k) * l(k, k);
        if (!std::isfinite(pivot) || pivot <= tol) {
            fail(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(k) + " is " + std::to_string(pivot)
                                                         + " (tolerance " + std::to_string(tol) + ")");
        }
        min_pivot = std::min(min_pivot, pivot);
    }
    f.min_pivot_ = min_pivot;
    return f;
}

Matrix spd_solve(const SpdFactor& f, const Matrix& rhs) {
    require(rhs.rows() == f.dimension(), ErrorCode::DimensionMismatch,
            "spd_solve rhs has " + std::to_string(rhs.rows()) + " rows, factor dimension is "
                + std::to_string(f.dimension()));
    Matrix x = f.llt_.solve(rhs);
    return x;
}

void rank_k_update_in_place(Matrix& p, const Matrix& x) {
    require(p.rows() == p.cols() && x.cols() == p.rows(), ErrorCode::DimensionMismatch,
            "rank_k_update: x has " + std::to_string(x.cols()) + " columns, p is " + std::to_string(p.rows()) + "x"
                + std::to_string(p.cols()));
    if (x.rows() == 0) {
        return;
    }
    require_finite(x, "rank_k_update rows");
    p.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0);
    mirror_lower(p);
}

Matrix rank_k_update(const Matrix& p, const Matrix& x) {
    Matrix out = p;
    rank_k_update_in_place(out, x);
    return out;
}

void cross_update_in_place(Matrix& q, const Matrix& x, const Matrix& y) {
    require(x.cols() == q.rows() && y.cols() == q.cols() && x.rows() == y.rows(), ErrorCode::DimensionMismatch,
            "cross_update: x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", y is "
                + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) + ", q is " + std::to_string(q.rows())
                + "x" + std::to_string(q.cols()));
    if (x.rows() == 0) {
        return;
    }
    require_finite(x, "cross_update features");
    require_finite(y, "cross_update targets");
    q.noalias() += x.transpose() * y;
}

Matrix cross_update(const Matrix& q, const Matrix& x, const Matrix& y) {
    Matrix out = q;
    cross_update_in_place(out, x, y);
    return out;
}

}// namespace mdaa
