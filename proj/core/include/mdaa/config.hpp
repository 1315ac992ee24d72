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

#include "mdaa/expansion.hpp"
#include "mdaa/metrics.hpp"
#include "mdaa/stream.hpp"
#include "mdaa/types.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdaa {

/// Everything a run needs. Plain `key = value` text on disk; README lists the
/// keys.
struct RunConfig {
    std::uint64_t seed = 0;
    TaskConfig task;

    /// Feature files replace the synthetic task when set.
    std::string source_file;
    std::string heldout_file;
    std::string target_file;

    BranchArray<bool> branches{true, true, true};
    std::uint32_t phi = 512;
    BranchArray<std::optional<std::uint32_t>> phi_override{};
    Nonlinearity nonlinearity = Nonlinearity::relu;
    /// Projection scale; unset means 1/√input_dim per branch.
    std::optional<double> expansion_scale;

    double gamma = 1.0;
    double theta = 1e-3;
    double lambda = 0.0;
    bool dynamic = false;
    std::uint32_t top_n = 2;
    bool bypass_gate = false;
    std::optional<Branch> poison;

    std::string schedule = "progressive-audio";
    double severity = 5.0;
    std::uint32_t phase_samples = 500;
    std::uint32_t batch_size = 64;
    bool backward = false;

    std::string out;
    ReportFormat format = ReportFormat::table_text;
    std::string snapshot = "mdaa.snapshot";
    std::string events;
    bool timing = false;
};

/// Applies one key. Throws InvalidConfig for unknown keys or bad values.
void apply_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Canonical text form, accepted back by parse_config.
std::string to_config_text(const RunConfig& config);

/// Range checks that do not need data. Throws InvalidConfig or InvalidN.
void validate(const RunConfig& config);

std::vector<std::string> config_keys();

}// namespace mdaa
