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
#include "mdaa/config.hpp"
#include "mdaa/event_log.hpp"
#include "mdaa/metrics.hpp"
#include "mdaa/stream.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdaa {

/// Source, held-out and (for feature files) target data of a run.
struct RunData {
    std::uint32_t num_classes = 0;
    std::uint32_t audio_dim = 0;
    std::uint32_t video_dim = 0;
    LabeledSet source;
    LabeledSet heldout;
    /// Synthetic runs stream from the task; feature-file runs from `target`.
    std::optional<SyntheticTask> task;
    std::optional<LabeledSet> target;
};

/// Generates the synthetic task or loads the configured feature files.
/// Throws Io, CorruptFeatureFile, InvalidConfig.
RunData resolve_data(const RunConfig& config);

BranchArray<std::optional<ExpansionSpec>> expansion_specs(const RunConfig& config, std::uint32_t audio_dim,
                                                         std::uint32_t video_dim);
FusionConfig fusion_config(const RunConfig& config);

/// The configured preset. Phases with zero samples are dropped, so
/// phase_samples = 0 yields an empty schedule.
PhaseSchedule schedule_for(const RunConfig& config);

struct InitResult {
    MdaaModel model;
    /// Clean held-out top-1 right after initialization.
    double source_accuracy = 0.0;
};

InitResult run_init(const RunConfig& config, const RunData& data);

struct AdaptResult {
    RunReport report;
    EventLog log;
};

/// Streams every phase through the model, adapting as it goes.
AdaptResult run_adapt(MdaaModel& model, const RunConfig& config, const RunData& data);

/// run_init followed by run_adapt.
AdaptResult run_full(const RunConfig& config, const RunData& data);
AdaptResult run_full(const RunConfig& config);

enum class SweepAxis { theta, n, gamma, lambda };

std::string_view to_string(SweepAxis axis);
std::optional<SweepAxis> parse_sweep_axis(std::string_view name);

/// Copy of the config with the axis set to `value`. Throws InvalidConfig or
/// InvalidN when the value is outside the axis' domain.
RunConfig with_axis_value(RunConfig config, SweepAxis axis, double value);

struct SweepEntry {
    double value = 0.0;
    std::optional<RunReport> report;
    /// Set when the run failed; the message of the error.
    std::string error;
};

/// One full run per value, all sharing the config's seed. Numerical failures
/// of a single value are recorded, not thrown.
std::vector<SweepEntry> run_sweep(const RunConfig& config, SweepAxis axis, std::span<const double> values);

std::string emit_sweep(std::span<const SweepEntry> entries, SweepAxis axis, ReportFormat format);

struct ComplexityPoint {
    std::uint32_t phi = 0;
    double seconds = 0.0;
    /// seconds / (c·φ³) with c fitted over all points.
    double ratio = 0.0;
};

struct ComplexityReport {
    std::vector<ComplexityPoint> points;
    /// Geometric mean of seconds/φ³.
    double constant = 0.0;
    bool within_factor_two = false;
};

/// Times one Cholesky factorization of a φ×φ SPD matrix per size, taking
/// the fastest of `repetitions` runs.
ComplexityReport measure_complexity(std::span<const std::uint32_t> phis, std::uint32_t repetitions,
                                    std::uint64_t seed);

std::string emit_complexity(const ComplexityReport& report, ReportFormat format);

}// namespace mdaa
