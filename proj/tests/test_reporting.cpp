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
#include "mdaa/adapter.hpp"
#include "mdaa/error.hpp"
#include "mdaa/event_log.hpp"
#include "mdaa/feature_file.hpp"
#include "mdaa/metrics.hpp"
#include "mdaa/stream.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mdaa {
namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no mdaa::Error thrown";
    return ErrorCode::Io;
}

// Values exactly representable as f32 so the binary format round-trips.
FeatureFile random_file(std::uint64_t seed, std::size_t n, Index da, Index dv, std::uint32_t classes) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> q(-512, 512);
    std::uniform_int_distribution<std::int32_t> label(-1, static_cast<std::int32_t>(classes) - 1);
    FeatureFile f;
    f.num_classes = classes;
    f.data.audio.resize(static_cast<Index>(n), da);
    f.data.video.resize(static_cast<Index>(n), dv);
    for (Index i = 0; i < f.data.audio.size(); ++i) f.data.audio.data()[i] = q(rng) / 64.0;
    for (Index i = 0; i < f.data.video.size(); ++i) f.data.video.data()[i] = q(rng) / 64.0;
    for (std::size_t i = 0; i < n; ++i) f.data.labels.push_back(label(rng));
    return f;
}

TEST(FeatureFileTest, BinaryRoundTrip) {
    const auto f = random_file(1, 13, 4, 3, 5);
    const auto bytes = encode_feature_file(f);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "AEXF");
    EXPECT_EQ(bytes.size(), 4 + 2 + 4 * 4 + 13 * (4 * 4 + 3 * 4 + 4));
    const auto g = decode_feature_file(bytes);
    EXPECT_EQ(g.num_classes, 5u);
    EXPECT_EQ(g.data.audio, f.data.audio);
    EXPECT_EQ(g.data.video, f.data.video);
    EXPECT_EQ(g.data.labels, f.data.labels);
}

TEST(FeatureFileTest, LittleEndianHeader) {
    const auto bytes = encode_feature_file(random_file(2, 258, 1, 2, 3));
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 0);
    // n_samples = 258 = 0x0102.
    EXPECT_EQ(bytes[6], 0x02);
    EXPECT_EQ(bytes[7], 0x01);
    EXPECT_EQ(bytes[8], 0);
}

TEST(FeatureFileTest, BinaryRejectsDamage) {
    const auto bytes = encode_feature_file(random_file(3, 5, 2, 2, 3));
    EXPECT_EQ(code_of([&] { decode_feature_file(std::span(bytes).first(bytes.size() - 1)); }),
              ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { decode_feature_file(std::span(bytes).first(3)); }), ErrorCode::CorruptFeatureFile);
    auto magic = bytes;
    magic[0] = 'B';
    EXPECT_EQ(code_of([&] { decode_feature_file(magic); }), ErrorCode::CorruptFeatureFile);
    auto version = bytes;
    version[4] = 7;
    EXPECT_EQ(code_of([&] { decode_feature_file(version); }), ErrorCode::CorruptFeatureFile);
    auto label = bytes;
    label[label.size() - 4] = 9;
    label[label.size() - 3] = label[label.size() - 2] = label[label.size() - 1] = 0;
    EXPECT_EQ(code_of([&] { decode_feature_file(label); }), ErrorCode::CorruptFeatureFile);
}

TEST(FeatureFileTest, CsvMatchesBinary) {
    const auto f = random_file(4, 9, 3, 2, 4);
    std::ostringstream csv;
    csv.precision(17);
    csv << "audio_0,audio_1,audio_2,video_0,video_1,label\n";
    for (std::size_t i = 0; i < 9; ++i) {
        const auto r = static_cast<Index>(i);
        csv << f.data.audio(r, 0) << ',' << f.data.audio(r, 1) << ',' << f.data.audio(r, 2) << ','
            << f.data.video(r, 0) << ',' << f.data.video(r, 1) << ',' << f.data.labels[i] << '\n';
    }
    std::istringstream in(csv.str());
    const auto g = parse_feature_csv(in);
    EXPECT_EQ(g.data.audio, f.data.audio);
    EXPECT_EQ(g.data.video, f.data.video);
    EXPECT_EQ(g.data.labels, f.data.labels);
}

TEST(FeatureFileTest, CsvErrors) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_feature_csv(in);
    };
    EXPECT_EQ(code_of([&] { parse(""); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,label\n1,0\n"); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,video_0\n1,0\n"); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,video_0,label\n1,2\n"); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,video_0,label\n1,x,0\n"); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,video_0,label\n1,2,0.5\n"); }), ErrorCode::CorruptFeatureFile);
    EXPECT_EQ(code_of([&] { parse("audio_0,video_0,label\n1,nan,0\n"); }), ErrorCode::NonFiniteInput);
}

TEST(FeatureFileTest, LabeledRowsDropsUnlabeled) {
    const auto f = random_file(5, 40, 2, 2, 3);
    const auto l = labeled_rows(f.data);
    std::size_t expected = 0;
    for (auto y : f.data.labels) expected += y >= 0 ? 1 : 0;
    EXPECT_EQ(l.size(), expected);
    for (auto y : l.labels) EXPECT_GE(y, 0);
}

AdaptationEvent fake_event(std::size_t index, std::uint32_t prediction, Branch leader,
                           BranchArray<std::uint32_t> argmaxes, BranchArray<bool> accepted) {
    AdaptationEvent ev;
    ev.sample_index = index;
    ev.prediction = prediction;
    ev.leader = leader;
    ev.soft_label = {{prediction}, {1.0}};
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        ev.map[k] = 0.5 + 0.1 * static_cast<double>(k);
        ev.ac_prediction[k] = argmaxes[k];
        ev.gates[k] = GateDecision{b, 0.9, *ev.map[k], 1e-3, accepted[k]};
    }
    return ev;
}

TEST(ScorePhase, CountsAndRates) {
    std::vector<AdaptationEvent> events{
        fake_event(0, 1, Branch::fused, {1, 1, 1}, {true, false, false}),
        fake_event(1, 0, Branch::video, {2, 0, 1}, {true, false, true}),
        fake_event(2, 2, Branch::audio, {2, 1, 2}, {false, true, false}),
        fake_event(3, 2, Branch::fused, {0, 2, 2}, {true, false, false}),
    };
    const std::vector<std::int32_t> truth{1, 0, 0, 2};
    const auto p = score_phase(events, truth, 3, "x", "audio:shift:1");
    EXPECT_EQ(p.samples, 4u);
    EXPECT_EQ(p.top1, 0.75);
    EXPECT_EQ(*p.ac_top1[0], 0.25);
    EXPECT_EQ(*p.ac_top1[1], 0.75);
    EXPECT_EQ(*p.ac_top1[2], 0.5);
    EXPECT_EQ(*p.acceptance_rate[0], 0.75);
    EXPECT_EQ(*p.acceptance_rate[1], 0.25);
    EXPECT_EQ(*p.acceptance_rate[2], 0.25);
    EXPECT_EQ(p.leader_share[0], 0.25);
    EXPECT_EQ(p.leader_share[1], 0.25);
    EXPECT_EQ(p.leader_share[2], 0.5);
    EXPECT_EQ(p.phase_index, 3u);
    EXPECT_EQ(p.corruption, "audio:shift:1");
}

TEST(ScorePhase, AllCorrectAndZeroAcceptance) {
    std::vector<AdaptationEvent> events;
    std::vector<std::int32_t> truth;
    for (std::size_t i = 0; i < 20; ++i) {
        events.push_back(fake_event(i, static_cast<std::uint32_t>(i % 3), Branch::fused, {0, 0, 0}, {false, false, false}));
        truth.push_back(static_cast<std::int32_t>(i % 3));
    }
    const auto p = score_phase(events, truth);
    EXPECT_EQ(p.top1, 1.0);
    for (const auto& r : p.acceptance_rate) EXPECT_EQ(*r, 0.0);
}

TEST(ScorePhase, RandomPredictionsAreNearChance) {
    constexpr std::uint32_t classes = 10;
    constexpr std::size_t n = 20000;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::uint32_t> pick(0, classes - 1);
    std::vector<AdaptationEvent> events;
    std::vector<std::int32_t> truth;
    for (std::size_t i = 0; i < n; ++i) {
        events.push_back(fake_event(i, pick(rng), Branch::fused, {0, 0, 0}, {false, false, false}));
        truth.push_back(static_cast<std::int32_t>(pick(rng)));
    }
    const double p = 1.0 / classes;
    EXPECT_NEAR(score_phase(events, truth).top1, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(ScorePhase, LeaderShareSumsToOne) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(0, 2);
    std::vector<AdaptationEvent> events;
    std::vector<std::int32_t> truth;
    for (std::size_t i = 0; i < 997; ++i) {
        events.push_back(fake_event(i, 0, kAllBranches[static_cast<std::size_t>(pick(rng))], {0, 0, 0}, {}));
        truth.push_back(0);
    }
    const auto p = score_phase(events, truth);
    EXPECT_NEAR(p.leader_share[0] + p.leader_share[1] + p.leader_share[2], 1.0, 1e-12);
}

TEST(ScorePhase, LengthMismatch) {
    std::vector<AdaptationEvent> events{fake_event(0, 0, Branch::fused, {0, 0, 0}, {})};
    std::vector<std::int32_t> truth{0, 1};
    EXPECT_EQ(code_of([&] { score_phase(events, truth); }), ErrorCode::LengthMismatch);
}

PhaseReport phase(std::size_t index, std::size_t samples, double top1) {
    PhaseReport p;
    p.phase_index = index;
    p.name = "p" + std::to_string(index);
    p.corruption = "video:scale:0.3";
    p.samples = samples;
    p.top1 = top1;
    p.ac_top1 = {0.1, std::nullopt, 1.0 / 3.0};
    p.acceptance_rate = {0.25, std::nullopt, 0.0};
    p.leader_share = {0.2, 0.3, 0.5};
    return p;
}

TEST(RunReportTest, AverageIsSampleWeighted) {
    const auto run = make_run_report({phase(0, 100, 0.5), phase(1, 300, 0.9), phase(2, 7, 1.0 / 7.0)});
    const double expected = (100 * 0.5 + 300 * 0.9 + 7 * (1.0 / 7.0)) / 407.0;
    EXPECT_NEAR(run.average_top1, expected, 1e-12);
    EXPECT_EQ(make_run_report({}).average_top1, 0.0);
}

TEST(RunReportTest, JsonLinesRoundTripIsExact) {
    auto run = make_run_report({phase(0, 10, 0.1), phase(1, 11, 2.0 / 3.0)});
    run.source_accuracy = 0.987654321;
    run.forgetting = -1e-17;
    run.wall_seconds = 0.125;
    run.peak_rss_bytes = 123456789;
    EXPECT_EQ(parse_json_lines(emit_report(run, ReportFormat::json_lines)), run);
    const RunReport empty = make_run_report({});
    const auto text = emit_report(empty, ReportFormat::json_lines);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    EXPECT_NE(text.find("\"summary\""), std::string::npos);
    EXPECT_EQ(parse_json_lines(text), empty);
    EXPECT_EQ(code_of([] { parse_json_lines("{\"type\":\"phase\"}\n"); }), ErrorCode::InvalidConfig);
}

TEST(RunReportTest, CsvRowCount) {
    for (std::size_t n : {0u, 1u, 6u}) {
        std::vector<PhaseReport> phases;
        for (std::size_t k = 0; k < n; ++k) phases.push_back(phase(k, 5, 0.5));
        const auto text = emit_report(make_run_report(phases), ReportFormat::csv);
        EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), n + 2);
    }
}

TEST(RunReportTest, TableHasPhasesAsColumnsAndAvgLast) {
    const auto text = emit_report(make_run_report({phase(0, 5, 0.5), phase(1, 5, 0.25)}), ReportFormat::table_text);
    const auto first_line = text.substr(0, text.find('\n'));
    const auto p0 = first_line.find("p0");
    const auto p1 = first_line.find("p1");
    const auto avg = first_line.find("Avg.");
    ASSERT_NE(p0, std::string::npos);
    ASSERT_NE(avg, std::string::npos);
    EXPECT_LT(p0, p1);
    EXPECT_LT(p1, avg);
}

TEST(RunReportTest, FormatNames) {
    EXPECT_EQ(parse_report_format("json_lines"), ReportFormat::json_lines);
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
    EXPECT_EQ(parse_report_format("table"), ReportFormat::table_text);
    EXPECT_FALSE(parse_report_format("xml").has_value());
}

EventLog sample_log() {
    EventLog log;
    log.phases = {{"A", "audio:shift:1"}, {"B", "video:dropout:0.5"}};
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::uint32_t> pick(0, 3);
    std::bernoulli_distribution coin(0.4);
    for (std::size_t i = 0; i < 30; ++i) {
        auto ev = fake_event(i, pick(rng), kAllBranches[i % 3], {pick(rng), pick(rng), pick(rng)},
                             {coin(rng), coin(rng), coin(rng)});
        ev.soft_label = {{ev.prediction, (ev.prediction + 1) % 4}, {2.0 / 3.0, 1.0 / 3.0}};
        log.records.push_back({ev, static_cast<std::int32_t>(pick(rng)), i < 12 ? 0u : 1u});
    }
    log.source_accuracy = 0.97;
    log.forgetting = 0.003;
    return log;
}

TEST(EventLogTest, RoundTrip) {
    const auto log = sample_log();
    const auto text = encode_event_log(log);
    EXPECT_EQ(decode_event_log(text), log);
    EXPECT_EQ(encode_event_log(decode_event_log(text)), text);
}

TEST(EventLogTest, RescoringIsByteIdentical) {
    const auto log = sample_log();
    const auto report = score_log(log);
    ASSERT_EQ(report.phases.size(), 2u);
    EXPECT_EQ(report.phases[0].samples, 12u);
    EXPECT_EQ(report.phases[1].name, "B");
    EXPECT_EQ(report.source_accuracy, log.source_accuracy);
    EXPECT_EQ(report.forgetting, log.forgetting);
    for (auto fmt : {ReportFormat::json_lines, ReportFormat::csv, ReportFormat::table_text}) {
        EXPECT_EQ(emit_report(score_log(decode_event_log(encode_event_log(log))), fmt), emit_report(report, fmt));
    }
}

TEST(EventLogTest, RejectsGarbage) {
    EXPECT_EQ(code_of([] { decode_event_log("{\"type\":\"event\"}\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { decode_event_log("not json\n"); }), ErrorCode::InvalidConfig);
}

TEST(ForgettingMeterTest, ZeroRightAfterInitAndNotInitialized) {
    TaskConfig t;
    t.num_classes = 3;
    t.audio_dim = 4;
    t.video_dim = 4;
    t.source_samples = 150;
    t.heldout_samples = 60;
    const auto g = generate_task(t);
    const BranchArray<std::optional<ExpansionSpec>> specs{ExpansionSpec{4, 16, 1, Nonlinearity::relu, 0.5},
                                                          ExpansionSpec{4, 16, 2, Nonlinearity::relu, 0.5},
                                                          ExpansionSpec{8, 16, 3, Nonlinearity::relu, 0.35}};
    const auto model =
        MdaaModel::initialize(specs, SourceData{g.source.audio, g.source.video, g.source.labels}, 3, 1.0, {});
    ForgettingMeter meter;
    EXPECT_FALSE(meter.initialized());
    EXPECT_EQ(code_of([&] { meter.measure(model, g.heldout); }), ErrorCode::NotInitialized);
    meter.record_baseline(model, g.heldout);
    EXPECT_EQ(meter.measure(model, g.heldout), 0.0);
    EXPECT_EQ(meter.baseline(), evaluate_accuracy(model, g.heldout));
}

}// namespace
}// namespace mdaa
