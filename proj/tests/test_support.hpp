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

#include "mdaa/linalg.hpp"

#include <cstdint>
#include <random>

namespace mdaa::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

// Plain triple loops, kept free of Eigen expression templates.
inline Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix c = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k)
            for (Index j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
}

inline Matrix naive_gram(const Matrix& x) {
    Matrix g = Matrix::Zero(x.cols(), x.cols());
    for (Index r = 0; r < x.rows(); ++r)
        for (Index i = 0; i < x.cols(); ++i)
            for (Index j = 0; j < x.cols(); ++j) g(i, j) += x(r, i) * x(r, j);
    return g;
}

inline Matrix random_spd(std::mt19937_64& rng, Index n) {
    const Matrix a = random_matrix(rng, n, n);
    Matrix p = naive_gram(a);
    for (Index i = 0; i < n; ++i) p(i, i) += 1.0;
    return p;
}

}// namespace mdaa::testing
