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
#include "mdaa/error.hpp"
#include "mdaa/types.hpp"

namespace mdaa {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::InvalidN: return "InvalidN";
        case ErrorCode::InvalidSeverity: return "InvalidSeverity";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NotInitialized: return "NotInitialized";
        case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
        case ErrorCode::CorruptFeatureFile: return "CorruptFeatureFile";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::audio: return "audio";
        case Branch::video: return "video";
        case Branch::fused: return "fused";
    }
    return "unknown";
}

std::optional<Branch> parse_branch(std::string_view name) {
    for (auto b : kAllBranches) {
        if (to_string(b) == name) {
            return b;
        }
    }
    return std::nullopt;
}

std::string_view to_string(Modality m) { return m == Modality::audio ? "audio" : "video"; }

std::optional<Modality> parse_modality(std::string_view name) {
    if (name == "audio") return Modality::audio;
    if (name == "video") return Modality::video;
    return std::nullopt;
}

}// namespace mdaa
