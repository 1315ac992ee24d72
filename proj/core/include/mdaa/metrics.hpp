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
#include "mdaa/stream.hpp"
#include "mdaa/types.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdaa {

struct PhaseReport {
    std::size_t phase_index = 0;
    std::string name;
    std::string corruption;
    /// Samples with a known label; top-1 figures are over these.
    std::size_t samples = 0;
    double top1 = 0.0;
    BranchArray<std::optional<double>> ac_top1{};
    BranchArray<std::optional<double>> acceptance_rate{};
    BranchArray<double> leader_share{};

    bool operator==(const PhaseReport&) const = default;
};

struct RunReport {
    std::vector<PhaseReport> phases;
    double average_top1 = 0.0;
    std::optional<double> source_accuracy;
    std::optional<double> forgetting;
    /// Resource figures vary run to run, so they are only filled on request.
    std::optional<double> wall_seconds;
    std::optional<std::uint64_t> peak_rss_bytes;

    bool operator==(const RunReport&) const = default;
};

/// Scores one phase. Samples whose truth is −1 count toward gate and leader
/// statistics but not toward accuracy. Throws LengthMismatch.
PhaseReport score_phase(std::span<const AdaptationEvent> events, std::span<const std::int32_t> truth,
                        std::size_t phase_index = 0, std::string name = {}, std::string corruption = {});

/// Sample-weighted mean of the phases' top-1.
double average_top1(std::span<const PhaseReport> phases);

/// Builds a report from phases, filling the weighted average.
RunReport make_run_report(std::vector<PhaseReport> phases);

/// Top-1 of the model on a labeled set without adapting.
double evaluate_accuracy(const MdaaModel& model, const LabeledSet& data, std::uint32_t batch_size = 256);

/// Top-1 of one branch's own classifier on a labeled set.
double evaluate_branch_accuracy(const MdaaModel& model, Branch branch, const LabeledSet& data);

/// Clean held-out accuracy before adaptation versus now. Positive values mean
/// the model forgot.
class ForgettingMeter {
public:
    void record_baseline(const MdaaModel& model, const LabeledSet& heldout);
    bool initialized() const { return baseline_.has_value(); }
    double baseline() const;
    /// Throws NotInitialized if no baseline was recorded.
    double measure(const MdaaModel& model, const LabeledSet& heldout) const;

private:
    std::optional<double> baseline_;
};

/// Wall clock and resident-memory growth over a scope.
class ResourceProbe {
public:
    ResourceProbe();
    double elapsed_seconds() const;
    /// Peak resident set minus the resident set at construction.
    std::uint64_t peak_rss_delta_bytes() const;

private:
    std::chrono::steady_clock::time_point start_;
    std::uint64_t start_rss_;
};

enum class ReportFormat { json_lines, table_text, csv };

std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string emit_report(const RunReport& run, ReportFormat format);

/// Inverse of the json_lines emitter. Throws InvalidConfig on malformed input.
RunReport parse_json_lines(std::string_view text);

}// namespace mdaa
