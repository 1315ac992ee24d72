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

#include "mdaa/adapter.hpp"
#include "mdaa/linalg.hpp"
#include "mdaa/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdaa {

struct TaskConfig {
    std::uint32_t num_classes = 10;
    std::uint32_t audio_dim = 32;
    std::uint32_t video_dim = 32;
    std::uint32_t source_samples = 2000;
    std::uint32_t heldout_samples = 500;
    /// Majority-to-minority per-class count ratio of the source set. The
    /// first ⌈C/2⌉ classes are the majority.
    std::uint32_t imbalance_ratio = 1;
    /// Expected norm of a class mean.
    double class_separation = 4.0;
    /// Per-coordinate standard deviation around the class mean.
    double within_class_std = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const TaskConfig&) const = default;
};

void validate(const TaskConfig& config);

/// Labeled raw features, one sample per row.
struct LabeledSet {
    Matrix audio;
    Matrix video;
    std::vector<std::int32_t> labels;

    std::size_t size() const { return labels.size(); }
    Batch as_batch() const { return Batch{audio, video}; }
};

/// Gaussian class clusters per modality. Sample `index` of stream `tag` is a
/// pure function of (seed, tag, index).
class SyntheticTask {
public:
    enum class Tag : std::uint64_t { source = 1, heldout = 2, target = 3 };

    explicit SyntheticTask(const TaskConfig& config);

    const TaskConfig& config() const { return config_; }
    const Matrix& means(Modality m) const { return m == Modality::audio ? audio_means_ : video_means_; }

    /// Draws one sample with a uniformly random class.
    std::int32_t draw(Tag tag, std::uint64_t index, std::span<double> audio, std::span<double> video) const;

    /// Draws one sample of the given class.
    void draw_class(Tag tag, std::uint64_t index, std::int32_t label, std::span<double> audio,
                    std::span<double> video) const;

    /// Uniform-class samples [first, first + count) of a stream.
    LabeledSet draw_set(Tag tag, std::uint64_t first, std::size_t count) const;

private:
    TaskConfig config_;
    Matrix audio_means_;
    Matrix video_means_;
};

struct GeneratedTask {
    SyntheticTask task;
    LabeledSet source;
    LabeledSet heldout;
};

/// Task, (optionally imbalanced) source set and a disjoint clean held-out set.
/// Throws InvalidConfig.
GeneratedTask generate_task(const TaskConfig& config);

/// Per-class source counts implied by the config's size and imbalance ratio.
std::vector<std::size_t> source_class_counts(const TaskConfig& config);

enum class CorruptionKind : std::uint8_t { additive_gaussian, scale, dropout, shift };

std::string_view to_string(CorruptionKind k);
std::optional<CorruptionKind> parse_corruption_kind(std::string_view name);

struct CorruptionSpec {
    Modality modality = Modality::audio;
    CorruptionKind kind = CorruptionKind::additive_gaussian;
    /// Noise std, scale factor, drop probability or offset, by kind.
    double severity = 0.0;

    bool operator==(const CorruptionSpec&) const = default;
};

std::string describe(const CorruptionSpec& spec);

/// Applies the corruption in place. Severity 0 leaves the vector untouched
/// for every kind; scale is multiplicative. Throws InvalidSeverity.
void corrupt_in_place(std::span<double> sample, const CorruptionSpec& spec, std::mt19937_64& rng);
std::vector<double> corrupt(std::span<const double> sample, const CorruptionSpec& spec, std::mt19937_64& rng);

enum class ScheduleMode : std::uint8_t { progressive_single_modality, interleaved };

struct Phase {
    std::string name;
    std::optional<CorruptionSpec> corruption;
    std::uint32_t samples = 0;
    std::uint32_t batch_size = 1;
};

struct PhaseSchedule {
    ScheduleMode mode = ScheduleMode::progressive_single_modality;
    std::vector<Phase> phases;

    std::size_t total_samples() const;
};

/// Enforces the mode's modality pattern and positive batch sizes.
void validate(const PhaseSchedule& schedule);

struct PresetOptions {
    double severity = 5.0;
    std::uint32_t phase_samples = 500;
    std::uint32_t batch_size = 64;
    /// Reverse phase order.
    bool backward = false;
    /// Magnitude unit for noise and shift families, usually the task's
    /// within-class standard deviation.
    double unit = 1.0;
};

/// progressive-audio (6 phases), progressive-video (15 phases), interleaved
/// (strictly alternating, 6 phases), clean (one clean phase). Severity is a
/// level in [0, 5] mapped onto each corruption family. Throws InvalidConfig.
PhaseSchedule preset_schedule(std::string_view name, const PresetOptions& options);

std::vector<std::string> preset_names();

/// A batch plus its hidden ground truth; only `batch` reaches the adapter.
struct LabeledBatch {
    Batch batch;
    std::vector<std::int32_t> truth;
    std::size_t phase_index = 0;
    std::size_t first_sample_index = 0;
};

/// Walks a schedule phase by phase, batch by batch. The clean modality of a
/// phase is bit-equal to the uncorrupted draw.
class Stream {
public:
    Stream(const SyntheticTask& task, PhaseSchedule schedule);

    std::optional<LabeledBatch> next();

    const PhaseSchedule& schedule() const { return schedule_; }

private:
    const SyntheticTask* task_;
    PhaseSchedule schedule_;
    std::size_t phase_ = 0;
    std::size_t offset_in_phase_ = 0;
    std::size_t global_index_ = 0;
};

/// Stream over a precomputed labeled set, one phase of fixed batch size.
std::vector<LabeledBatch> batches_of(const LabeledSet& data, std::uint32_t batch_size);

}// namespace mdaa
