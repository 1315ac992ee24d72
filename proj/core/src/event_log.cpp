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
#include "mdaa/event_log.hpp"

#include "mdaa/error.hpp"

#include <json.hpp>

#include <sstream>

namespace mdaa {

namespace {

using nlohmann::json;

json encode_event(const EventRecord& r) {
    const AdaptationEvent& ev = r.event;
    json o;
    o["type"] = "event";
    o["sample"] = ev.sample_index;
    o["phase"] = r.phase_index;
    o["truth"] = r.truth;
    o["leader"] = std::string(to_string(ev.leader));
    o["prediction"] = ev.prediction;
    o["label_classes"] = ev.soft_label.classes;
    o["label_weights"] = ev.soft_label.weights;
    json branches = json::object();
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        if (!ev.gates[k]) {
            continue;
        }
        const GateDecision& g = *ev.gates[k];
        branches[std::string(to_string(b))] = {{"map", *ev.map[k]},
                                               {"argmax", *ev.ac_prediction[k]},
                                               {"leader_map", g.leader_map},
                                               {"threshold", g.threshold},
                                               {"accepted", g.accepted}};
    }
    o["branches"] = std::move(branches);
    return o;
}

EventRecord decode_event(const json& o) {
    EventRecord r;
    AdaptationEvent& ev = r.event;
    ev.sample_index = o.at("sample").get<std::size_t>();
    r.phase_index = o.at("phase").get<std::size_t>();
    r.truth = o.at("truth").get<std::int32_t>();
    const auto leader = parse_branch(o.at("leader").get<std::string>());
    require(leader.has_value(), ErrorCode::InvalidConfig, "unknown leader branch");
    ev.leader = *leader;
    ev.prediction = o.at("prediction").get<std::uint32_t>();
    ev.soft_label.classes = o.at("label_classes").get<std::vector<std::uint32_t>>();
    ev.soft_label.weights = o.at("label_weights").get<std::vector<double>>();
    for (const auto& [name, g] : o.at("branches").items()) {
        const auto b = parse_branch(name);
        require(b.has_value(), ErrorCode::InvalidConfig, "unknown branch \"" + name + "\"");
        const auto k = index_of(*b);
        ev.map[k] = g.at("map").get<double>();
        ev.ac_prediction[k] = g.at("argmax").get<std::uint32_t>();
        ev.gates[k] = GateDecision{*b, g.at("leader_map").get<double>(), *ev.map[k], g.at("threshold").get<double>(),
                                   g.at("accepted").get<bool>()};
    }
    return r;
}

}// namespace

std::string encode_event_log(const EventLog& log) {
    std::string out;
    json header;
    header["type"] = "phases";
    header["phases"] = json::array();
    for (const auto& p : log.phases) {
        header["phases"].push_back({{"name", p.name}, {"corruption", p.corruption}});
    }
    out += header.dump() + '\n';
    for (const auto& r : log.records) {
        out += encode_event(r).dump() + '\n';
    }
    json footer;
    footer["type"] = "end";
    if (log.source_accuracy) footer["source_accuracy"] = *log.source_accuracy;
    if (log.forgetting) footer["forgetting"] = *log.forgetting;
    out += footer.dump() + '\n';
    return out;
}

EventLog decode_event_log(std::string_view text) {
    EventLog log;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = false;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const json o = json::parse(line);
            const auto type = o.at("type").get<std::string>();
            if (type == "phases") {
                header = true;
                for (const auto& p : o.at("phases")) {
                    log.phases.push_back({p.at("name").get<std::string>(), p.at("corruption").get<std::string>()});
                }
            } else if (type == "event") {
                log.records.push_back(decode_event(o));
            } else if (type == "end") {
                if (o.contains("source_accuracy")) log.source_accuracy = o.at("source_accuracy").get<double>();
                if (o.contains("forgetting")) log.forgetting = o.at("forgetting").get<double>();
            } else {
                fail(ErrorCode::InvalidConfig, "unknown event log record \"" + type + "\"");
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed event log: ") + e.what());
    }
    require(header, ErrorCode::InvalidConfig, "event log has no phase header");
    return log;
}

RunReport score_log(const EventLog& log) {
    std::vector<PhaseReport> phases;
    std::size_t i = 0;
    for (std::size_t p = 0; p < log.phases.size(); ++p) {
        std::vector<AdaptationEvent> events;
        std::vector<std::int32_t> truth;
        while (i < log.records.size() && log.records[i].phase_index == p) {
            events.push_back(log.records[i].event);
            truth.push_back(log.records[i].truth);
            ++i;
        }
        phases.push_back(score_phase(events, truth, p, log.phases[p].name, log.phases[p].corruption));
    }
    require(i == log.records.size(), ErrorCode::InvalidConfig, "event log records are not in phase order");
    RunReport run = make_run_report(std::move(phases));
    run.source_accuracy = log.source_accuracy;
    run.forgetting = log.forgetting;
    return run;
}

}// namespace mdaa
