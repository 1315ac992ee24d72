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
#include "mdaa/config.hpp"

#include "mdaa/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mdaa {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
    fail(ErrorCode::InvalidConfig,
         "config key \"" + std::string(key) + "\": \"" + std::string(value) + "\" is not " + expected);
}

template<typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto r = std::from_chars(value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) {
        bad_value(key, value, "a non-negative integer");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto r = std::from_chars(value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out)) {
        bad_value(key, value, "a finite real number");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, value, "a boolean");
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed", [](RunConfig& c, auto k, auto v) {
             c.seed = parse_unsigned<std::uint64_t>(k, v);
             c.task.seed = c.seed;
         }},
        {"num_classes", [](RunConfig& c, auto k, auto v) { c.task.num_classes = parse_unsigned<std::uint32_t>(k, v); }},
        {"audio_dim", [](RunConfig& c, auto k, auto v) { c.task.audio_dim = parse_unsigned<std::uint32_t>(k, v); }},
        {"video_dim", [](RunConfig& c, auto k, auto v) { c.task.video_dim = parse_unsigned<std::uint32_t>(k, v); }},
        {"source_samples",
         [](RunConfig& c, auto k, auto v) { c.task.source_samples = parse_unsigned<std::uint32_t>(k, v); }},
        {"heldout_samples",
         [](RunConfig& c, auto k, auto v) { c.task.heldout_samples = parse_unsigned<std::uint32_t>(k, v); }},
        {"imbalance_ratio",
         [](RunConfig& c, auto k, auto v) { c.task.imbalance_ratio = parse_unsigned<std::uint32_t>(k, v); }},
        {"class_separation", [](RunConfig& c, auto k, auto v) { c.task.class_separation = parse_real(k, v); }},
        {"within_class_std", [](RunConfig& c, auto k, auto v) { c.task.within_class_std = parse_real(k, v); }},
        {"source_file", [](RunConfig& c, auto, auto v) { c.source_file = std::string(v); }},
        {"heldout_file", [](RunConfig& c, auto, auto v) { c.heldout_file = std::string(v); }},
        {"target_file", [](RunConfig& c, auto, auto v) { c.target_file = std::string(v); }},
        {"branches", [](RunConfig& c, auto k, auto v) {
             c.branches = {false, false, false};
             std::istringstream list{std::string(v)};
             std::string item;
             while (std::getline(list, item, ',')) {
                 const auto b = parse_branch(trim(item));
                 if (!b) {
                     bad_value(k, v, "a comma-separated list of audio, video, fused");
                 }
                 c.branches[index_of(*b)] = true;
             }
         }},
        {"phi", [](RunConfig& c, auto k, auto v) { c.phi = parse_unsigned<std::uint32_t>(k, v); }},
        {"phi_audio", [](RunConfig& c, auto k, auto v) { c.phi_override[0] = parse_unsigned<std::uint32_t>(k, v); }},
        {"phi_video", [](RunConfig& c, auto k, auto v) { c.phi_override[1] = parse_unsigned<std::uint32_t>(k, v); }},
        {"phi_fused", [](RunConfig& c, auto k, auto v) { c.phi_override[2] = parse_unsigned<std::uint32_t>(k, v); }},
        {"nonlinearity", [](RunConfig& c, auto k, auto v) {
             if (v == "relu") c.nonlinearity = Nonlinearity::relu;
             else if (v == "identity") c.nonlinearity = Nonlinearity::identity;
             else bad_value(k, v, "relu or identity");
         }},
        {"expansion_scale", [](RunConfig& c, auto k, auto v) {
             if (v == "auto") c.expansion_scale.reset();
             else c.expansion_scale = parse_real(k, v);
         }},
        {"gamma", [](RunConfig& c, auto k, auto v) { c.gamma = parse_real(k, v); }},
        {"theta", [](RunConfig& c, auto k, auto v) { c.theta = parse_real(k, v); }},
        {"theta_ini", [](RunConfig& c, auto k, auto v) { c.theta = parse_real(k, v); }},
        {"lambda", [](RunConfig& c, auto k, auto v) { c.lambda = parse_real(k, v); }},
        {"dynamic", [](RunConfig& c, auto k, auto v) { c.dynamic = parse_bool(k, v); }},
        {"top_n", [](RunConfig& c, auto k, auto v) { c.top_n = parse_unsigned<std::uint32_t>(k, v); }},
        {"gate", [](RunConfig& c, auto k, auto v) {
             if (v == "dlfm") c.bypass_gate = false;
             else if (v == "bypass") c.bypass_gate = true;
             else bad_value(k, v, "dlfm or bypass");
         }},
        {"poison", [](RunConfig& c, auto k, auto v) {
             if (v == "none") {
                 c.poison.reset();
             } else if (const auto b = parse_branch(v)) {
                 c.poison = *b;
             } else {
                 bad_value(k, v, "none, audio, video or fused");
             }
         }},
        {"schedule", [](RunConfig& c, auto, auto v) { c.schedule = std::string(v); }},
        {"severity", [](RunConfig& c, auto k, auto v) { c.severity = parse_real(k, v); }},
        {"phase_samples", [](RunConfig& c, auto k, auto v) { c.phase_samples = parse_unsigned<std::uint32_t>(k, v); }},
        {"batch_size", [](RunConfig& c, auto k, auto v) { c.batch_size = parse_unsigned<std::uint32_t>(k, v); }},
        {"direction", [](RunConfig& c, auto k, auto v) {
             if (v == "forward") c.backward = false;
             else if (v == "backward") c.backward = true;
             else bad_value(k, v, "forward or backward");
         }},
        {"out", [](RunConfig& c, auto, auto v) { c.out = std::string(v); }},
        {"format", [](RunConfig& c, auto k, auto v) {
             const auto f = parse_report_format(v);
             if (!f) bad_value(k, v, "json_lines, table_text or csv");
             c.format = *f;
         }},
        {"snapshot", [](RunConfig& c, auto, auto v) { c.snapshot = std::string(v); }},
        {"events", [](RunConfig& c, auto, auto v) { c.events = std::string(v); }},
        {"timing", [](RunConfig& c, auto k, auto v) { c.timing = parse_bool(k, v); }},
    };
    return table;
}

std::string real_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}// namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) {
        keys.push_back(k);
    }
    return keys;
}

void apply_config_value(RunConfig& config, std::string_view key, std::string_view value) {
    const auto it = setters().find(key);
    require(it != setters().end(), ErrorCode::InvalidConfig, "unknown config key \"" + std::string(key) + "\"");
    it->second(config, key, value);
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        require(eq != std::string::npos, ErrorCode::InvalidConfig,
                "config line " + std::to_string(line_no) + ": expected key = value");
        apply_config_value(base, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open config " + path);
    }
    return parse_config(in, std::move(base));
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream out;
    out << "seed = " << c.seed << '\n';
    out << "num_classes = " << c.task.num_classes << '\n';
    out << "audio_dim = " << c.task.audio_dim << '\n';
    out << "video_dim = " << c.task.video_dim << '\n';
    out << "source_samples = " << c.task.source_samples << '\n';
    out << "heldout_samples = " << c.task.heldout_samples << '\n';
    out << "imbalance_ratio = " << c.task.imbalance_ratio << '\n';
    out << "class_separation = " << real_text(c.task.class_separation) << '\n';
    out << "within_class_std = " << real_text(c.task.within_class_std) << '\n';
    if (!c.source_file.empty()) out << "source_file = " << c.source_file << '\n';
    if (!c.heldout_file.empty()) out << "heldout_file = " << c.heldout_file << '\n';
    if (!c.target_file.empty()) out << "target_file = " << c.target_file << '\n';
    std::string branches;
    for (auto b : kAllBranches) {
        if (c.branches[index_of(b)]) {
            branches += (branches.empty() ? "" : ",") + std::string(to_string(b));
        }
    }
    out << "branches = " << branches << '\n';
    out << "phi = " << c.phi << '\n';
    for (auto b : kAllBranches) {
        if (c.phi_override[index_of(b)]) {
            out << "phi_" << to_string(b) << " = " << *c.phi_override[index_of(b)] << '\n';
        }
    }
    out << "nonlinearity = " << to_string(c.nonlinearity) << '\n';
    out << "expansion_scale = " << (c.expansion_scale ? real_text(*c.expansion_scale) : std::string("auto")) << '\n';
    out << "gamma = " << real_text(c.gamma) << '\n';
    out << "theta = " << real_text(c.theta) << '\n';
    out << "lambda = " << real_text(c.lambda) << '\n';
    out << "dynamic = " << (c.dynamic ? "true" : "false") << '\n';
    out << "top_n = " << c.top_n << '\n';
    out << "gate = " << (c.bypass_gate ? "bypass" : "dlfm") << '\n';
    out << "poison = " << (c.poison ? std::string(to_string(*c.poison)) : std::string("none")) << '\n';
    out << "schedule = " << c.schedule << '\n';
    out << "severity = " << real_text(c.severity) << '\n';
    out << "phase_samples = " << c.phase_samples << '\n';
    out << "batch_size = " << c.batch_size << '\n';
    out << "direction = " << (c.backward ? "backward" : "forward") << '\n';
    if (!c.out.empty()) out << "out = " << c.out << '\n';
    const char* format = c.format == ReportFormat::json_lines ? "json_lines"
                         : c.format == ReportFormat::csv      ? "csv"
                                                              : "table_text";
    out << "format = " << format << '\n';
    out << "snapshot = " << c.snapshot << '\n';
    if (!c.events.empty()) out << "events = " << c.events << '\n';
    out << "timing = " << (c.timing ? "true" : "false") << '\n';
    return out.str();
}

void validate(const RunConfig& c) {
    require(c.gamma > 0.0, ErrorCode::InvalidConfig, "gamma must be positive, got " + real_text(c.gamma));
    require(c.theta >= 0.0, ErrorCode::InvalidConfig, "theta must be non-negative");
    require(c.lambda >= 0.0, ErrorCode::InvalidConfig, "lambda must be non-negative");
    require(c.phi >= 1, ErrorCode::InvalidConfig, "phi must be positive");
    for (const auto& p : c.phi_override) {
        require(!p || *p >= 1, ErrorCode::InvalidConfig, "phi overrides must be positive");
    }
    require(!c.expansion_scale || *c.expansion_scale > 0.0, ErrorCode::InvalidConfig,
            "expansion_scale must be positive");
    require(c.branches[0] || c.branches[1] || c.branches[2], ErrorCode::InvalidConfig,
            "at least one branch must be enabled");
    require(c.batch_size >= 1, ErrorCode::InvalidConfig, "batch_size must be positive");
    require(c.severity >= 0.0 && c.severity <= 5.0, ErrorCode::InvalidConfig, "severity must lie in [0, 5]");
    if (c.source_file.empty()) {
        validate(c.task);
        require(c.top_n >= 1 && c.top_n <= c.task.num_classes, ErrorCode::InvalidN,
                "top_n must lie in [1, num_classes]");
    }
}

}// namespace mdaa
