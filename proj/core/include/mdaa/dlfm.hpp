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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mdaa {

/// Probability row of one classifier for one sample.
struct BranchProbs {
    Branch branch;
    std::span<const double> probs;
};

struct Election {
    Branch leader = Branch::fused;
    /// MAP score per branch; empty for branches that did not take part.
    BranchArray<std::optional<double>> map{};

    double leader_map() const { return *map[index_of(leader)]; }
};

/// Leader = branch whose probability row has the largest maximum entry.
/// Ties go to fused, then video, then audio. Throws EmptyInput.
Election elect_leader(std::span<const BranchProbs> rows);

/// Sparse pseudo-label: the leader's top-n classes with weights
/// α_i = (n + 1 − i) / (n(n+1)/2), strictly decreasing and summing to 1.
struct SoftLabel {
    std::vector<std::uint32_t> classes;
    std::vector<double> weights;

    std::size_t size() const { return classes.size(); }
    RowVector densify(std::size_t num_classes) const;

    bool operator==(const SoftLabel&) const = default;
};

/// Throws InvalidN unless 1 ≤ n ≤ num_classes, DimensionMismatch if the row
/// length differs from num_classes. Ties between equal probabilities go to
/// the lower class index.
SoftLabel build_soft_label(std::span<const double> leader_probs, std::size_t n, std::size_t num_classes);

/// Hard label: one-hot at the argmax, the n = 1 case.
SoftLabel build_hard_label(std::span<const double> leader_probs);

/// Index of the largest entry; ties to the lower index.
std::uint32_t argmax(std::span<const double> row);

struct GateDecision {
    Branch ac_id = Branch::audio;
    double leader_map = 0.0;
    double ac_map = 0.0;
    double threshold = 0.0;
    bool accepted = false;

    bool operator==(const GateDecision&) const = default;
};

/// Accept iff leader_map − ac_map ≥ θ.
inline bool gate(double leader_map, double ac_map, double theta) { return leader_map - ac_map >= theta; }

GateDecision gate_decision(Branch ac, double leader_map, double ac_map, double theta);

/// Per-classifier thresholds, optionally drifting with the mean leader gap:
///   θ_t = θ_{t−1} + λ (d_t − d_{t−1}) for t > 1, θ_1 = θ_ini.
struct ThresholdState {
    BranchArray<double> theta{};
    double theta_ini = 1e-3;
    double lambda = 0.0;
    BranchArray<std::optional<double>> previous_gap{};

    static ThresholdState fixed(double theta_ini, double lambda = 0.0);

    double theta_of(Branch b) const { return theta[index_of(b)]; }

    bool operator==(const ThresholdState&) const = default;
};

/// Folds one batch's leader gaps (all samples, accepted or not) into the
/// state for `ac`. Throws EmptyBatch.
ThresholdState update_threshold(const ThresholdState& state, Branch ac, std::span<const double> batch_gaps);

}// namespace mdaa
