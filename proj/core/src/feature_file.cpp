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
#include "mdaa/feature_file.hpp"

#include "mdaa/binary_io.hpp"
#include "mdaa/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace mdaa {

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
    const LabeledSet& d = file.data;
    require(d.audio.rows() == static_cast<Index>(d.size()) && d.video.rows() == static_cast<Index>(d.size()),
            ErrorCode::DimensionMismatch, "feature file rows disagree");
    ByteWriter out;
    out.magic("AEXF");
    out.put<std::uint16_t>(kFeatureFileVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(d.size()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(d.audio.cols()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(d.video.cols()));
    out.put<std::uint32_t>(file.num_classes);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = static_cast<Index>(i);
        for (Index j = 0; j < d.audio.cols(); ++j) {
            out.put<float>(static_cast<float>(d.audio(r, j)));
        }
        for (Index j = 0; j < d.video.cols(); ++j) {
            out.put<float>(static_cast<float>(d.video(r, j)));
        }
        out.put<std::int32_t>(d.labels[i]);
    }
    return out.take();
}

FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, ErrorCode::CorruptFeatureFile);
    in.expect_magic("AEXF");
    const auto version = in.get<std::uint16_t>();
    require(version == kFeatureFileVersion, ErrorCode::CorruptFeatureFile,
            "unsupported feature file version " + std::to_string(version));
    const auto n = in.get<std::uint32_t>();
    const auto audio_dim = in.get<std::uint32_t>();
    const auto video_dim = in.get<std::uint32_t>();
    FeatureFile file;
    file.num_classes = in.get<std::uint32_t>();
    const std::size_t record = (static_cast<std::size_t>(audio_dim) + video_dim + 1) * 4;
    require(in.remaining() == record * n, ErrorCode::CorruptFeatureFile,
            "payload size does not match the header");
    LabeledSet& d = file.data;
    d.audio.resize(n, audio_dim);
    d.video.resize(n, video_dim);
    d.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < audio_dim; ++j) {
            d.audio(i, j) = in.get<float>();
        }
        for (std::uint32_t j = 0; j < video_dim; ++j) {
            d.video(i, j) = in.get<float>();
        }
        const auto label = in.get<std::int32_t>();
        require(label >= -1 && (label < 0 || static_cast<std::uint32_t>(label) < file.num_classes),
                ErrorCode::CorruptFeatureFile, "label " + std::to_string(label) + " out of range");
        d.labels[i] = label;
    }
    require(d.audio.allFinite() && d.video.allFinite(), ErrorCode::NonFiniteInput,
            "feature file contains NaN or Inf");
    return file;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        const auto start = cell.find_first_not_of(' ');
        cells.push_back(start == std::string::npos ? std::string() : cell.substr(start));
    }
    return cells;
}

double parse_double(const std::string& text, std::size_t line) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    require(result.ec == std::errc() && result.ptr == end, ErrorCode::CorruptFeatureFile,
            "line " + std::to_string(line) + ": cannot parse \"" + text + "\"");
    return value;
}

}// namespace

FeatureFile parse_feature_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::CorruptFeatureFile, "missing CSV header");
    const auto header = split_csv_line(line);
    std::size_t audio_dim = 0;
    std::size_t video_dim = 0;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (i + 1 == header.size()) {
            require(h == "label", ErrorCode::CorruptFeatureFile, "last CSV column must be \"label\"");
        } else if (h.rfind("audio_", 0) == 0) {
            require(video_dim == 0 && h == "audio_" + std::to_string(audio_dim), ErrorCode::CorruptFeatureFile,
                    "unexpected CSV column \"" + h + "\"");
            ++audio_dim;
        } else {
            require(h == "video_" + std::to_string(video_dim), ErrorCode::CorruptFeatureFile,
                    "unexpected CSV column \"" + h + "\"");
            ++video_dim;
        }
    }
    require(audio_dim > 0 && video_dim > 0, ErrorCode::CorruptFeatureFile, "CSV needs audio and video columns");

    std::vector<std::vector<double>> rows;
    std::vector<std::int32_t> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv_line(line);
        require(cells.size() == header.size(), ErrorCode::CorruptFeatureFile,
                "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells");
        std::vector<double> values(audio_dim + video_dim);
        for (std::size_t j = 0; j < values.size(); ++j) {
            values[j] = parse_double(cells[j], line_no);
        }
        const double label = parse_double(cells.back(), line_no);
        require(label >= -1 && label == std::floor(label), ErrorCode::CorruptFeatureFile,
                "line " + std::to_string(line_no) + ": bad label");
        rows.push_back(std::move(values));
        labels.push_back(static_cast<std::int32_t>(label));
    }

    FeatureFile file;
    LabeledSet& d = file.data;
    d.audio.resize(static_cast<Index>(rows.size()), static_cast<Index>(audio_dim));
    d.video.resize(static_cast<Index>(rows.size()), static_cast<Index>(video_dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < audio_dim; ++j) {
            d.audio(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
        for (std::size_t j = 0; j < video_dim; ++j) {
            d.video(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][audio_dim + j];
        }
    }
    d.labels = std::move(labels);
    const auto max_label = d.labels.empty() ? -1 : *std::max_element(d.labels.begin(), d.labels.end());
    file.num_classes = static_cast<std::uint32_t>(max_label + 1);
    require(d.audio.allFinite() && d.video.allFinite(), ErrorCode::NonFiniteInput, "CSV contains NaN or Inf");
    return file;
}

FeatureFile load_feature_file(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "AEXF", 4) == 0) {
        return decode_feature_file(bytes);
    }
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    return parse_feature_csv(in);
}

LabeledSet labeled_rows(const LabeledSet& data) {
    std::vector<Index> keep;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] >= 0) {
            keep.push_back(static_cast<Index>(i));
        }
    }
    LabeledSet out;
    out.audio.resize(static_cast<Index>(keep.size()), data.audio.cols());
    out.video.resize(static_cast<Index>(keep.size()), data.video.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.audio.row(static_cast<Index>(i)) = data.audio.row(keep[i]);
        out.video.row(static_cast<Index>(i)) = data.video.row(keep[i]);
        out.labels.push_back(data.labels[static_cast<std::size_t>(keep[i])]);
    }
    return out;
}

}// namespace mdaa
