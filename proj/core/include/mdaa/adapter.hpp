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

#include "mdaa/analytic_classifier.hpp"
#include "mdaa/dlfm.hpp"
#include "mdaa/expansion.hpp"
#include "mdaa/linalg.hpp"
#include "mdaa/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mdaa {

struct FusionConfig {
    double theta_ini = 1e-3;
    double lambda = 0.0;
    std::uint32_t top_n = 2;
    bool dynamic = false;

    bool operator==(const FusionConfig&) const = default;
};

void validate(const FusionConfig& config, std::size_t num_classes);

/// What the adapter sees of a test batch: raw features only, one sample per
/// row. Ground truth travels separately (see LabeledBatch in stream.hpp).
struct Batch {
    Matrix audio;
    Matrix video;

    Index size() const { return audio.rows(); }
};

/// Full record of one sample's pass through the adapter.
struct AdaptationEvent {
    std::size_t sample_index = 0;
    BranchArray<std::optional<double>> map{};
    BranchArray<std::optional<std::uint32_t>> ac_prediction{};
    Branch leader = Branch::fused;
    std::uint32_t prediction = 0;
    SoftLabel soft_label;
    BranchArray<std::optional<GateDecision>> gates{};

    bool operator==(const AdaptationEvent&) const = default;
};

/// Source set for initialization, labels in [0, C).
struct SourceData {
    const Matrix& audio;
    const Matrix& video;
    std::span<const std::int32_t> labels;
};

/// The adapter: one frozen expansion and one analytic classifier per branch,
/// with per-sample leader election and gating and per-batch flushes.
class MdaaModel {
public:
    /// Fits every configured branch on the source set. The fused branch reads
    /// [audio | video]. Throws EmptyClass, InvalidSpec, DimensionMismatch.
    static MdaaModel initialize(const BranchArray<std::optional<ExpansionSpec>>& specs, const SourceData& source,
                                std::size_t num_classes, double gamma, const FusionConfig& fusion);

    /// Predicts every sample with the current weights, then updates each
    /// classifier with the samples its gate accepted. Events are returned in
    /// input order and numbered from `first_sample_index`.
    std::vector<AdaptationEvent> infer_and_adapt(const Batch& batch, std::size_t first_sample_index = 0);

    /// Same predictions as infer_and_adapt, no state change.
    std::vector<std::uint32_t> infer_only(const Batch& batch) const;

    /// Events infer_and_adapt would produce, without adapting.
    std::vector<AdaptationEvent> trace(const Batch& batch, std::size_t first_sample_index = 0) const;

    /// "MDAM" blob, see README for the layout.
    std::vector<std::uint8_t> snapshot() const;
    /// Throws CorruptSnapshot on bad magic, version, branch table or length.
    static MdaaModel restore(std::span<const std::uint8_t> bytes);

    bool has_branch(Branch b) const { return units_[index_of(b)].has_value(); }
    const AnalyticClassifier& classifier(Branch b) const;
    AnalyticClassifier& classifier(Branch b);
    const Expansion& expansion(Branch b) const;

    /// Expanded features for one branch of a batch.
    Matrix expand(Branch b, const Batch& batch) const;

    std::size_t num_classes() const { return num_classes_; }
    const FusionConfig& fusion() const { return fusion_; }
    const ThresholdState& thresholds() const { return thresholds_; }

    /// Ablation switch: accept every branch for every sample, skipping the
    /// gate. Not persisted.
    void set_gate_bypass(bool bypass) { bypass_gate_ = bypass; }
    bool gate_bypassed() const { return bypass_gate_; }

    /// Ablation switch: the given branch learns from the leader's least likely
    /// class as a hard label instead of the soft label. Not persisted.
    void set_poisoned_branch(std::optional<Branch> branch) { poisoned_ = branch; }
    std::optional<Branch> poisoned_branch() const { return poisoned_; }

    static constexpr std::uint16_t kSnapshotVersion = 2;

private:
    struct Unit {
        Expansion expansion;
        AnalyticClassifier classifier;
    };

    struct BatchPass {
        std::vector<AdaptationEvent> events;
        BranchArray<Matrix> features;
        std::vector<std::uint32_t> least_likely;
    };

    MdaaModel() = default;

    BatchPass run_pass(const Batch& batch, std::size_t first_sample_index) const;
    void check_batch(const Batch& batch) const;

    BranchArray<std::optional<Unit>> units_{};
    std::size_t num_classes_ = 0;
    FusionConfig fusion_;
    ThresholdState thresholds_;
    bool bypass_gate_ = false;
    std::optional<Branch> poisoned_;
};

}// namespace mdaa
