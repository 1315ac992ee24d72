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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mdaa {

/// Brute-force weighted ridge solution over every sample ever seen:
///   argmin Σ ω_k‖y_k − x_k W‖² + ‖Ȳ − X_t W‖² + γ‖W‖²
/// assembled entry by entry and solved by Gaussian elimination with partial
/// pivoting. Shares no code with the recursive path it checks.
/// Throws NotPositiveDefinite when the system is numerically singular.
Matrix joint_ridge_solution(const Matrix& source_features, const Matrix& source_labels,
                            std::span<const double> source_weights, const Matrix& target_features,
                            const Matrix& target_labels, double gamma);

/// Dense Gaussian elimination with partial pivoting, a·x = b.
Matrix gaussian_solve(Matrix a, Matrix b);

struct OracleConfig {
    std::vector<std::uint32_t> phis{8, 32, 128};
    std::vector<std::uint32_t> classes{2, 10};
    std::uint32_t cases = 54;
    std::uint32_t source_samples = 200;
    std::uint32_t imbalance_ratio = 3;
    std::uint32_t max_batches = 100;
    std::uint32_t max_batch_size = 17;
    std::uint32_t input_dim = 16;
    double gamma = 1.0;
    double tolerance = 1e-8;
    /// Add cases with duplicated feature columns and repeated samples.
    bool adversarial = true;
    std::uint64_t seed = 0;
};

struct OracleCase {
    std::string kind;
    std::uint32_t phi = 0;
    std::uint32_t num_classes = 0;
    std::size_t batches = 0;
    std::size_t target_samples = 0;
    double rel_error = 0.0;
    bool passed = false;
    std::string diagnosis;
};

struct OracleReport {
    std::vector<OracleCase> cases;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Runs randomized recursive-versus-joint comparisons. φ above 256 is
/// rejected with InvalidConfig; numerical failures are reported per case.
OracleReport run_oracle(const OracleConfig& config);

std::string oracle_report_json(const OracleReport& report);

}// namespace mdaa
