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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mdaa {

/// The three classifier-carrying blocks of the backbone. Numeric values are
/// the on-disk branch ids.
enum class Branch : std::uint8_t { audio = 0, video = 1, fused = 2 };

inline constexpr std::size_t kBranchCount = 3;

inline constexpr std::array<Branch, kBranchCount> kAllBranches{Branch::audio, Branch::video, Branch::fused};

/// Leader tie-break order, highest priority first.
inline constexpr std::array<Branch, kBranchCount> kLeaderPriority{Branch::fused, Branch::video, Branch::audio};

template<typename T>
using BranchArray = std::array<T, kBranchCount>;

constexpr std::size_t index_of(Branch b) { return static_cast<std::size_t>(b); }

std::string_view to_string(Branch b);
std::optional<Branch> parse_branch(std::string_view name);

/// Raw input modalities; the fused branch consumes both.
enum class Modality : std::uint8_t { audio = 0, video = 1 };

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view name);

}// namespace mdaa
