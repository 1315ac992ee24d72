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
#include "mdaa/metrics.hpp"

#include "mdaa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mdaa {

PhaseReport score_phase(std::span<const AdaptationEvent> events, std::span<const std::int32_t> truth,
                        std::size_t phase_index, std::string name, std::string corruption) {
    require(events.size() == truth.size(), ErrorCode::LengthMismatch,
            std::to_string(events.size()) + " events vs " + std::to_string(truth.size()) + " labels");
    PhaseReport r;
    r.phase_index = phase_index;
    r.name = std::move(name);
    r.corruption = std::move(corruption);

    std::size_t labeled = 0;
    std::size_t correct = 0;
    BranchArray<std::size_t> ac_correct{};
    BranchArray<std::size_t> accepted{};
    BranchArray<std::size_t> present{};
    BranchArray<std::size_t> led{};
    for (std::size_t i = 0; i < events.size(); ++i) {
        const AdaptationEvent& ev = events[i];
        ++led[index_of(ev.leader)];
        for (auto b : kAllBranches) {
            const auto k = index_of(b);
            if (ev.gates[k]) {
                ++present[k];
                accepted[k] += ev.gates[k]->accepted ? 1 : 0;
            }
        }
        if (truth[i] < 0) {
            continue;
        }
        ++labeled;
        const auto t = static_cast<std::uint32_t>(truth[i]);
        correct += ev.prediction == t ? 1 : 0;
        for (auto b : kAllBranches) {
            const auto k = index_of(b);
            if (ev.ac_prediction[k] && *ev.ac_prediction[k] == t) {
                ++ac_correct[k];
            }
        }
    }
    r.samples = labeled;
    r.top1 = labeled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labeled);
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        if (present[k] == 0) {
            continue;
        }
        r.ac_top1[k] = labeled == 0 ? 0.0 : static_cast<double>(ac_correct[k]) / static_cast<double>(labeled);
        r.acceptance_rate[k] = static_cast<double>(accepted[k]) / static_cast<double>(present[k]);
    }
    if (!events.empty()) {
        for (auto b : kAllBranches) {
            r.leader_share[index_of(b)] =
                static_cast<double>(led[index_of(b)]) / static_cast<double>(events.size());
        }
    }
    return r;
}

double average_top1(std::span<const PhaseReport> phases) {
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& p : phases) {
        weighted += p.top1 * static_cast<double>(p.samples);
        total += p.samples;
    }
    return total == 0 ? 0.0 : weighted / static_cast<double>(total);
}

RunReport make_run_report(std::vector<PhaseReport> phases) {
    RunReport run;
    run.phases = std::move(phases);
    run.average_top1 = average_top1(run.phases);
    return run;
}

double evaluate_accuracy(const MdaaModel& model, const LabeledSet& data, std::uint32_t batch_size) {
    if (data.size() == 0) {
        return 0.0;
    }
    std::size_t correct = 0;
    std::size_t labeled = 0;
    for (const auto& b : batches_of(data, batch_size)) {
        const auto predictions = model.infer_only(b.batch);
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (b.truth[i] < 0) {
                continue;
            }
            ++labeled;
            correct += predictions[i] == static_cast<std::uint32_t>(b.truth[i]) ? 1 : 0;
        }
    }
    return labeled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labeled);
}

double evaluate_branch_accuracy(const MdaaModel& model, Branch branch, const LabeledSet& data) {
    if (data.size() == 0) {
        return 0.0;
    }
    const Matrix logits = model.classifier(branch).predict_logits(model.expand(branch, data.as_batch()));
    std::size_t correct = 0;
    std::size_t labeled = 0;
    for (Index r = 0; r < logits.rows(); ++r) {
        const auto t = data.labels[static_cast<std::size_t>(r)];
        if (t < 0) {
            continue;
        }
        ++labeled;
        Index best = 0;
        logits.row(r).maxCoeff(&best);
        correct += best == t ? 1 : 0;
    }
    return labeled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labeled);
}

void ForgettingMeter::record_baseline(const MdaaModel& model, const LabeledSet& heldout) {
    baseline_ = evaluate_accuracy(model, heldout);
}

double ForgettingMeter::baseline() const {
    require(baseline_.has_value(), ErrorCode::NotInitialized, "forgetting baseline was never recorded");
    return *baseline_;
}

double ForgettingMeter::measure(const MdaaModel& model, const LabeledSet& heldout) const {
    return baseline() - evaluate_accuracy(model, heldout);
}

namespace {

std::uint64_t read_status_kb(const char* key) {
    std::ifstream status("/proc/self/status");
    std::string line;
    const std::string prefix = std::string(key) + ":";
    while (std::getline(status, line)) {
        if (line.rfind(prefix, 0) == 0) {
            std::istringstream fields(line.substr(prefix.size()));
            std::uint64_t kb = 0;
            fields >> kb;
            return kb;
        }
    }
    return 0;
}

}// namespace

ResourceProbe::ResourceProbe() : start_(std::chrono::steady_clock::now()), start_rss_(read_status_kb("VmRSS") * 1024) {}

double ResourceProbe::elapsed_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

std::uint64_t ResourceProbe::peak_rss_delta_bytes() const {
    const std::uint64_t peak = read_status_kb("VmHWM") * 1024;
    return peak > start_rss_ ? peak - start_rss_ : 0;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "json_lines" || name == "jsonl") return ReportFormat::json_lines;
    if (name == "table_text" || name == "table") return ReportFormat::table_text;
    if (name == "csv") return ReportFormat::csv;
    return std::nullopt;
}

namespace {

using nlohmann::json;

json branch_object(const BranchArray<std::optional<double>>& values) {
    json o = json::object();
    for (auto b : kAllBranches) {
        if (values[index_of(b)]) {
            o[std::string(to_string(b))] = *values[index_of(b)];
        }
    }
    return o;
}

json branch_object(const BranchArray<double>& values) {
    json o = json::object();
    for (auto b : kAllBranches) {
        o[std::string(to_string(b))] = values[index_of(b)];
    }
    return o;
}

BranchArray<std::optional<double>> optional_branches(const json& o) {
    BranchArray<std::optional<double>> out{};
    for (auto b : kAllBranches) {
        const auto key = std::string(to_string(b));
        if (o.contains(key)) {
            out[index_of(b)] = o.at(key).get<double>();
        }
    }
    return out;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

std::string percent(const std::optional<double>& v) { return v ? percent(*v) : std::string("-"); }

std::string shortest(double v) {
    // Same shortest round-trip form the JSON emitter uses.
    return json(v).dump();
}

std::string emit_json_lines(const RunReport& run) {
    std::string out;
    for (const auto& p : run.phases) {
        json o;
        o["type"] = "phase";
        o["phase_index"] = p.phase_index;
        o["name"] = p.name;
        o["corruption"] = p.corruption;
        o["samples"] = p.samples;
        o["top1"] = p.top1;
        o["ac_top1"] = branch_object(p.ac_top1);
        o["acceptance_rate"] = branch_object(p.acceptance_rate);
        o["leader_share"] = branch_object(p.leader_share);
        out += o.dump();
        out += '\n';
    }
    json s;
    s["type"] = "summary";
    s["phases"] = run.phases.size();
    s["average_top1"] = run.average_top1;
    if (run.source_accuracy) s["source_accuracy"] = *run.source_accuracy;
    if (run.forgetting) s["forgetting"] = *run.forgetting;
    if (run.wall_seconds) s["wall_seconds"] = *run.wall_seconds;
    if (run.peak_rss_bytes) s["peak_rss_bytes"] = *run.peak_rss_bytes;
    out += s.dump();
    out += '\n';
    return out;
}

std::string emit_table(const RunReport& run) {
    std::vector<std::string> header{"Row"};
    for (const auto& p : run.phases) {
        header.push_back(p.name.empty() ? "phase" + std::to_string(p.phase_index) : p.name);
    }
    header.emplace_back("Avg.");

    std::vector<std::vector<std::string>> rows;
    auto add_row = [&](std::string label, auto&& value_of, std::string avg) {
        std::vector<std::string> row{std::move(label)};
        for (const auto& p : run.phases) {
            row.push_back(value_of(p));
        }
        row.push_back(std::move(avg));
        rows.push_back(std::move(row));
    };
    add_row("MDAA top1", [](const PhaseReport& p) { return percent(p.top1); }, percent(run.average_top1));
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        add_row("AC " + std::string(to_string(b)) + " top1", [k](const PhaseReport& p) { return percent(p.ac_top1[k]); },
                "");
    }
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        add_row("accept " + std::string(to_string(b)),
                [k](const PhaseReport& p) { return percent(p.acceptance_rate[k]); }, "");
    }
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        add_row("leader " + std::string(to_string(b)), [k](const PhaseReport& p) { return percent(p.leader_share[k]); },
                "");
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
            } else {
                out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
            }
        }
        out << '\n';
    };
    emit_row(header);
    for (const auto& row : rows) {
        emit_row(row);
    }
    if (run.source_accuracy) out << "source accuracy: " << percent(*run.source_accuracy) << '\n';
    if (run.forgetting) out << "forgetting: " << percent(*run.forgetting) << '\n';
    if (run.wall_seconds) out << "wall seconds: " << shortest(*run.wall_seconds) << '\n';
    if (run.peak_rss_bytes) out << "peak rss delta bytes: " << *run.peak_rss_bytes << '\n';
    return out.str();
}

std::string emit_csv(const RunReport& run) {
    std::ostringstream out;
    out << "kind,phase_index,name,corruption,samples,top1";
    for (const char* group : {"top1", "accept", "leader"}) {
        for (auto b : kAllBranches) {
            out << ',' << group << '_' << to_string(b);
        }
    }
    out << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? shortest(*v) : std::string(); };
    for (const auto& p : run.phases) {
        out << "phase," << p.phase_index << ',' << p.name << ',' << p.corruption << ',' << p.samples << ','
            << shortest(p.top1);
        for (auto b : kAllBranches) out << ',' << opt(p.ac_top1[index_of(b)]);
        for (auto b : kAllBranches) out << ',' << opt(p.acceptance_rate[index_of(b)]);
        for (auto b : kAllBranches) out << ',' << shortest(p.leader_share[index_of(b)]);
        out << '\n';
    }
    std::size_t total = 0;
    for (const auto& p : run.phases) {
        total += p.samples;
    }
    out << "summary,," << "Avg." << ",," << total << ',' << shortest(run.average_top1);
    for (int i = 0; i < 9; ++i) {
        out << ',';
    }
    out << '\n';
    return out.str();
}

}// namespace

std::string emit_report(const RunReport& run, ReportFormat format) {
    switch (format) {
        case ReportFormat::json_lines: return emit_json_lines(run);
        case ReportFormat::table_text: return emit_table(run);
        case ReportFormat::csv: return emit_csv(run);
    }
    return {};
}

RunReport parse_json_lines(std::string_view text) {
    RunReport run;
    bool summary = false;
    std::istringstream in{std::string(text)};
    std::string line;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const json o = json::parse(line);
            const auto type = o.at("type").get<std::string>();
            if (type == "phase") {
                PhaseReport p;
                p.phase_index = o.at("phase_index").get<std::size_t>();
                p.name = o.at("name").get<std::string>();
                p.corruption = o.at("corruption").get<std::string>();
                p.samples = o.at("samples").get<std::size_t>();
                p.top1 = o.at("top1").get<double>();
                p.ac_top1 = optional_branches(o.at("ac_top1"));
                p.acceptance_rate = optional_branches(o.at("acceptance_rate"));
                const auto shares = optional_branches(o.at("leader_share"));
                for (auto b : kAllBranches) {
                    p.leader_share[index_of(b)] = shares[index_of(b)].value_or(0.0);
                }
                run.phases.push_back(std::move(p));
            } else if (type == "summary") {
                summary = true;
                run.average_top1 = o.at("average_top1").get<double>();
                if (o.contains("source_accuracy")) run.source_accuracy = o.at("source_accuracy").get<double>();
                if (o.contains("forgetting")) run.forgetting = o.at("forgetting").get<double>();
                if (o.contains("wall_seconds")) run.wall_seconds = o.at("wall_seconds").get<double>();
                if (o.contains("peak_rss_bytes")) run.peak_rss_bytes = o.at("peak_rss_bytes").get<std::uint64_t>();
            } else {
                fail(ErrorCode::InvalidConfig, "unknown record type \"" + type + "\"");
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed report: ") + e.what());
    }
    require(summary, ErrorCode::InvalidConfig, "report has no summary record");
    return run;
}

}// namespace mdaa
