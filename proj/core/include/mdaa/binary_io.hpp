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

#include "mdaa/error.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace mdaa {

/// Appends fixed-width little-endian values to a byte buffer.
class ByteWriter {
public:
    void magic(std::string_view tag) {
        for (char c : tag) {
            bytes_.push_back(static_cast<std::uint8_t>(c));
        }
    }

    template<typename T>
    void put(T value) {
        if constexpr (std::is_same_v<T, double>) {
            put(std::bit_cast<std::uint64_t>(value));
        } else if constexpr (std::is_same_v<T, float>) {
            put(std::bit_cast<std::uint32_t>(value));
        } else {
            using U = std::make_unsigned_t<T>;
            auto u = static_cast<U>(value);
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
            }
        }
    }

    void append(std::span<const std::uint8_t> raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }

    std::vector<std::uint8_t>& bytes() { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader; every short read raises `code`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, ErrorCode code) : bytes_(bytes), code_(code) {}

    void expect_magic(std::string_view tag) {
        need(tag.size(), "magic");
        if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
            fail(code_, "bad magic, expected \"" + std::string(tag) + "\"");
        }
        pos_ += tag.size();
    }

    template<typename T>
    T get() {
        if constexpr (std::is_same_v<T, double>) {
            return std::bit_cast<double>(get<std::uint64_t>());
        } else if constexpr (std::is_same_v<T, float>) {
            return std::bit_cast<float>(get<std::uint32_t>());
        } else {
            using U = std::make_unsigned_t<T>;
            need(sizeof(T), "value");
            U u = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                u |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
            }
            pos_ += sizeof(T);
            return static_cast<T>(u);
        }
    }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            fail(code_, std::string("truncated input while reading ") + what);
        }
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    ErrorCode code() const { return code_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    ErrorCode code_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}// namespace mdaa
