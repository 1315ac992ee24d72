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
#include "mdaa/types.hpp"

#include <cstdint>
#include <span>

namespace mdaa {

enum class Nonlinearity : std::uint8_t { relu = 0, identity = 1 };

std::string_view to_string(Nonlinearity n);

struct ExpansionSpec {
    std::uint32_t input_dim = 0;
    std::uint32_t expanded_dim = 512;
    std::uint64_t seed = 0;
    Nonlinearity nonlinearity = Nonlinearity::relu;
    double scale = 1.0;

    bool operator==(const ExpansionSpec&) const = default;
};

struct ExpandedFeature {
    RowVector values;
    Branch modality_tag = Branch::audio;
};

/// Frozen random projection standing in for the backbone's projection layer:
/// y = nonlinearity(x · R), R ~ scale · N(0, 1), shape input_dim × φ.
class Expansion {
public:
    /// Throws InvalidSpec for zero dimensions or a non-positive scale.
    static Expansion build(const ExpansionSpec& spec);

    /// Test hook: uses the given projection verbatim instead of sampling one.
    static Expansion with_projection(const ExpansionSpec& spec, Matrix projection);

    const ExpansionSpec& spec() const { return spec_; }
    const Matrix& projection() const { return projection_; }
    std::uint32_t input_dim() const { return spec_.input_dim; }
    std::uint32_t expanded_dim() const { return spec_.expanded_dim; }

    /// Expands a batch, one sample per row.
    Matrix expand(const Matrix& batch) const;

    ExpandedFeature expand(std::span<const double> x, Branch tag) const;

private:
    Expansion(ExpansionSpec spec, Matrix projection) : spec_(spec), projection_(std::move(projection)) {}

    ExpansionSpec spec_;
    Matrix projection_;
};

void validate(const ExpansionSpec& spec);

}// namespace mdaa
