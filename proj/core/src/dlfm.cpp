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
#include "mdaa/dlfm.hpp"

#include "mdaa/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mdaa {

Election elect_leader(std::span<const BranchProbs> rows) {
    require(!rows.empty(), ErrorCode::EmptyInput, "elect_leader needs at least one probability row");
    Election e;
    for (const auto& row : rows) {
        require(!row.probs.empty(), ErrorCode::EmptyInput, "empty probability row");
        e.map[index_of(row.branch)] = *std::max_element(row.probs.begin(), row.probs.end());
    }
    std::optional<Branch> best;
    for (auto b : kLeaderPriority) {
        const auto& m = e.map[index_of(b)];
        if (m && (!best || *m > *e.map[index_of(*best)])) {
            best = b;
        }
    }
    e.leader = *best;
    return e;
}

std::uint32_t argmax(std::span<const double> row) {
    return static_cast<std::uint32_t>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
}

RowVector SoftLabel::densify(std::size_t num_classes) const {
    RowVector y = RowVector::Zero(static_cast<Index>(num_classes));
    for (std::size_t i = 0; i < classes.size(); ++i) {
        y(classes[i]) = weights[i];
    }
    return y;
}

SoftLabel build_soft_label(std::span<const double> leader_probs, std::size_t n, std::size_t num_classes) {
    require(leader_probs.size() == num_classes, ErrorCode::DimensionMismatch,
            "probability row has " + std::to_string(leader_probs.size()) + " entries, expected "
                + std::to_string(num_classes));
    require(n >= 1 && n <= num_classes, ErrorCode::InvalidN,
            "top-n must lie in [1, " + std::to_string(num_classes) + "], got " + std::to_string(n));

    std::vector<std::uint32_t> order(num_classes);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return leader_probs[a] > leader_probs[b]; });

    SoftLabel label;
    label.classes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    const double denom = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
    label.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        label.weights[i] = static_cast<double>(n - i) / denom;
    }
    return label;
}

SoftLabel build_hard_label(std::span<const double> leader_probs) {
    require(!leader_probs.empty(), ErrorCode::EmptyInput, "empty probability row");
    return SoftLabel{{argmax(leader_probs)}, {1.0}};
}

GateDecision gate_decision(Branch ac, double leader_map, double ac_map, double theta) {
    return GateDecision{ac, leader_map, ac_map, theta, gate(leader_map, ac_map, theta)};
}

ThresholdState ThresholdState::fixed(double theta_ini, double lambda) {
    ThresholdState s;
    s.theta.fill(theta_ini);
    s.theta_ini = theta_ini;
    s.lambda = lambda;
    return s;
}

ThresholdState update_threshold(const ThresholdState& state, Branch ac, std::span<const double> batch_gaps) {
    require(!batch_gaps.empty(), ErrorCode::EmptyBatch, "update_threshold on an empty batch");
    require(state.lambda >= 0.0, ErrorCode::InvalidConfig, "lambda must be non-negative");
    const double mean = std::accumulate(batch_gaps.begin(), batch_gaps.end(), 0.0)
                        / static_cast<double>(batch_gaps.size());
    ThresholdState next = state;
    const auto i = index_of(ac);
    // First batch: only record the gap. A fresh state already holds θ_ini.
    if (state.previous_gap[i] && state.lambda != 0.0) {
        next.theta[i] = state.theta[i] + state.lambda * (mean - *state.previous_gap[i]);
    }
    next.previous_gap[i] = mean;
    return next;
}

}// namespace mdaa
