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
#include "mdaa/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mdaa {

/// One adapter event plus the bookkeeping needed to re-score it later.
struct EventRecord {
    AdaptationEvent event;
    std::int32_t truth = -1;
    std::size_t phase_index = 0;

    bool operator==(const EventRecord&) const = default;
};

struct PhaseInfo {
    std::string name;
    std::string corruption;

    bool operator==(const PhaseInfo&) const = default;
};

/// Append-only record of a run: every sample, every gate.
struct EventLog {
    std::vector<PhaseInfo> phases;
    std::vector<EventRecord> records;
    std::optional<double> source_accuracy;
    std::optional<double> forgetting;

    bool operator==(const EventLog&) const = default;
};

/// JSON lines: a header with the phase table, one line per event, a footer
/// with the held-out measurements.
std::string encode_event_log(const EventLog& log);
EventLog decode_event_log(std::string_view text);

/// Re-derives the run report from a log.
RunReport score_log(const EventLog& log);

}// namespace mdaa
