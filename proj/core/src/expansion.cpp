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
#include "mdaa/expansion.hpp"

#include "mdaa/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mdaa {

std::string_view to_string(Nonlinearity n) { return n == Nonlinearity::relu ? "relu" : "identity"; }

void validate(const ExpansionSpec& spec) {
    require(spec.input_dim > 0, ErrorCode::InvalidSpec, "expansion input_dim must be positive");
    require(spec.expanded_dim > 0, ErrorCode::InvalidSpec, "expansion expanded_dim must be positive");
    require(std::isfinite(spec.scale) && spec.scale > 0.0, ErrorCode::InvalidSpec,
            "expansion scale must be positive and finite");
    require(spec.nonlinearity == Nonlinearity::relu || spec.nonlinearity == Nonlinearity::identity,
            ErrorCode::InvalidSpec, "unknown nonlinearity");
}

Expansion Expansion::build(const ExpansionSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix projection(spec.input_dim, spec.expanded_dim);
    // Row-major fill order is part of the determinism contract.
    for (Index i = 0; i < projection.rows(); ++i) {
        for (Index j = 0; j < projection.cols(); ++j) {
            projection(i, j) = spec.scale * normal(rng);
        }
    }
    return Expansion(spec, std::move(projection));
}

Expansion Expansion::with_projection(const ExpansionSpec& spec, Matrix projection) {
    validate(spec);
    require(projection.rows() == spec.input_dim && projection.cols() == spec.expanded_dim,
            ErrorCode::DimensionMismatch, "projection shape does not match the expansion spec");
    return Expansion(spec, std::move(projection));
}

Matrix Expansion::expand(const Matrix& batch) const {
    require(batch.cols() == spec_.input_dim, ErrorCode::DimensionMismatch,
            "expand: input has " + std::to_string(batch.cols()) + " columns, expansion expects "
                + std::to_string(spec_.input_dim));
    require(batch.allFinite(), ErrorCode::NonFiniteInput, "expand: input contains NaN or Inf");
    Matrix out = batch * projection_;
    if (spec_.nonlinearity == Nonlinearity::relu) {
        out = out.cwiseMax(0.0);
    }
    return out;
}

ExpandedFeature Expansion::expand(std::span<const double> x, Branch tag) const {
    Matrix row(1, static_cast<Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        row(0, static_cast<Index>(i)) = x[i];
    }
    return ExpandedFeature{expand(row).row(0), tag};
}

}// namespace mdaa
