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

#include "mdaa/stream.hpp"

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace mdaa {

/// Precomputed embeddings with optional labels (−1 = unlabeled).
struct FeatureFile {
    std::uint32_t num_classes = 0;
    LabeledSet data;
};

inline constexpr std::uint16_t kFeatureFileVersion = 1;

/// "AEXF" binary layout: magic, u16 version, u32 n_samples, u32 audio_dim,
/// u32 video_dim, u32 num_classes, then per sample audio f32s, video f32s and
/// an i32 label. Little-endian. Values are stored as f32.
std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes);

/// CSV with a header of audio_0..audio_{A-1}, video_0..video_{V-1}, label.
/// num_classes is taken as max(label) + 1.
FeatureFile parse_feature_csv(std::istream& in);

/// Dispatches on the magic bytes: AEXF binary, anything else CSV.
FeatureFile load_feature_file(const std::string& path);

/// Keeps the rows whose label is not −1.
LabeledSet labeled_rows(const LabeledSet& data);

}// namespace mdaa
