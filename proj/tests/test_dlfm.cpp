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
#include "mdaa/dlfm.hpp"
#include "mdaa/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
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

Election elect(const std::vector<double>& a, const std::vector<double>& v, const std::vector<double>& f) {
    const std::vector<BranchProbs> rows{{Branch::audio, a}, {Branch::video, v}, {Branch::fused, f}};
    return elect_leader(rows);
}

TEST(ElectLeaderTest, StrictMaximumWins) {
    const Election e = elect({0.30, 0.70}, {0.90, 0.10}, {0.55, 0.45});
    EXPECT_EQ(e.leader, Branch::video);
    EXPECT_EQ(e.map[0], 0.70);
    EXPECT_EQ(e.map[1], 0.90);
    EXPECT_EQ(e.map[2], 0.55);
    EXPECT_EQ(e.leader_map(), 0.90);
}

TEST(ElectLeaderTest, TiesFollowPriority) {
    EXPECT_EQ(elect({0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}).leader, Branch::fused);
    EXPECT_EQ(elect({0.8, 0.2}, {0.2, 0.8}, {0.6, 0.4}).leader, Branch::video);
    const std::vector<double> row{0.8, 0.2};
    const std::vector<BranchProbs> two{{Branch::audio, row}, {Branch::video, row}};
    EXPECT_EQ(elect_leader(two).leader, Branch::video);
}

TEST(ElectLeaderTest, SingleBranch) {
    const std::vector<double> row{0.1, 0.9};
    const std::vector<BranchProbs> one{{Branch::audio, row}};
    const Election e = elect_leader(one);
    EXPECT_EQ(e.leader, Branch::audio);
    EXPECT_FALSE(e.map[1].has_value());
    EXPECT_EQ(code_of([] { elect_leader(std::span<const BranchProbs>{}); }), ErrorCode::EmptyInput);
}

TEST(ElectLeaderTest, OnlyTheMaximumMatters) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> rows(3, std::vector<double>(6));
        for (auto& r : rows) {
            for (auto& v : r) v = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
            const double s = std::accumulate(r.begin(), r.end(), 0.0);
            for (auto& v : r) v /= s;
        }
        const Branch before = elect(rows[0], rows[1], rows[2]).leader;
        for (auto& r : rows) {
            // Move the max to the front, then shuffle the rest.
            std::iter_swap(r.begin(), std::max_element(r.begin(), r.end()));
            std::shuffle(r.begin() + 1, r.end(), rng);
        }
        ASSERT_EQ(elect(rows[0], rows[1], rows[2]).leader, before);
    }
}

TEST(SoftLabelTest, NOneIsOneHot) {
    const std::vector<double> p{0.1, 0.6, 0.3};
    const SoftLabel s = build_soft_label(p, 1, 3);
    EXPECT_EQ(s.classes, (std::vector<std::uint32_t>{1}));
    EXPECT_EQ(s.weights, (std::vector<double>{1.0}));
    EXPECT_EQ(s, build_hard_label(p));
    RowVector expect(3);
    expect << 0.0, 1.0, 0.0;
    EXPECT_EQ(s.densify(3), expect);
}

TEST(SoftLabelTest, NTwoAndThree) {
    const std::vector<double> p{0.1, 0.5, 0.15, 0.25};
    const SoftLabel two = build_soft_label(p, 2, 4);
    EXPECT_EQ(two.classes, (std::vector<std::uint32_t>{1, 3}));
    EXPECT_EQ(two.weights, (std::vector<double>{2.0 / 3.0, 1.0 / 3.0}));
    const SoftLabel three = build_soft_label(p, 3, 4);
    EXPECT_EQ(three.classes, (std::vector<std::uint32_t>{1, 3, 2}));
    EXPECT_EQ(three.weights, (std::vector<double>{3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0}));
}

TEST(SoftLabelTest, TiesGoToLowerIndex) {
    const std::vector<double> p{0.2, 0.3, 0.2, 0.3};
    EXPECT_EQ(build_soft_label(p, 3, 4).classes, (std::vector<std::uint32_t>{1, 3, 0}));
    EXPECT_EQ(argmax(p), 1u);
}

TEST(SoftLabelTest, ContractForEveryN) {
    std::mt19937_64 rng(9);
    for (std::size_t c = 1; c <= 40; ++c) {
        std::vector<double> p(c);
        for (auto& v : p) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        for (std::size_t n = 1; n <= c; ++n) {
            const SoftLabel s = build_soft_label(p, n, c);
            ASSERT_EQ(s.size(), n);
            const RowVector d = s.densify(c);
            EXPECT_NEAR(d.sum(), 1.0, 1e-12);
            EXPECT_EQ(static_cast<std::size_t>((d.array() != 0.0).count()), n);
            for (std::size_t i = 1; i < n; ++i) ASSERT_GT(s.weights[i - 1], s.weights[i]);
            EXPECT_GT(s.weights.back(), 0.0);
        }
    }
}

TEST(SoftLabelTest, RejectsBadN) {
    const std::vector<double> p{0.5, 0.5};
    EXPECT_EQ(code_of([&] { build_soft_label(p, 0, 2); }), ErrorCode::InvalidN);
    EXPECT_EQ(code_of([&] { build_soft_label(p, 3, 2); }), ErrorCode::InvalidN);
    EXPECT_EQ(code_of([&] { build_soft_label(p, 1, 3); }), ErrorCode::DimensionMismatch);
}

TEST(GateTest, PaperScenarios) {
    EXPECT_TRUE(gate(0.9, 0.3, 1e-3));
    EXPECT_FALSE(gate(0.5, 0.5, 1e-3));
}

TEST(GateTest, BoundaryIsInclusive) {
    EXPECT_TRUE(gate(0.75, 0.5, 0.25));
    EXPECT_TRUE(gate(0.5, 0.5, 0.0));
    for (double m : {0.125, 0.5, 0.875}) {
        EXPECT_TRUE(gate(m, m - 0.0625, 0.0625));
    }
}

TEST(GateTest, LeaderNeverSelfUpdates) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double m = u(rng);
        ASSERT_FALSE(gate(m, m, 1e-12 + u(rng)));
    }
}

TEST(GateTest, Monotone) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const double l = u(rng), a = u(rng), t = 0.2 * u(rng), d = 0.1 * u(rng);
        if (gate(l, a, t)) {
            ASSERT_TRUE(gate(l + d, a, t));
            ASSERT_TRUE(gate(l, a - d, t));
        } else {
            ASSERT_FALSE(gate(l, a, t + d));
        }
    }
}

TEST(GateTest, DecisionRecordsInputs) {
    const GateDecision g = gate_decision(Branch::audio, 0.8, 0.2, 0.1);
    EXPECT_EQ(g.ac_id, Branch::audio);
    EXPECT_EQ(g.leader_map, 0.8);
    EXPECT_EQ(g.ac_map, 0.2);
    EXPECT_EQ(g.threshold, 0.1);
    EXPECT_TRUE(g.accepted);
}

TEST(ThresholdTest, WorkedExample) {
    ThresholdState s = ThresholdState::fixed(1e-3, 0.1);
    const std::vector<double> first{0.1, 0.3};  // mean 0.2
    const std::vector<double> second{0.3, 0.3};// mean 0.3
    s = update_threshold(s, Branch::audio, first);
    EXPECT_EQ(s.theta_of(Branch::audio), 1e-3);
    s = update_threshold(s, Branch::audio, second);
    EXPECT_NEAR(s.theta_of(Branch::audio), 0.011, 1e-15);
    EXPECT_EQ(s.theta_of(Branch::video), 1e-3);
}

TEST(ThresholdTest, ZeroLambdaOrFlatGapKeepsTheta) {
    std::mt19937_64 rng(5);
    ThresholdState s = ThresholdState::fixed(0.02, 0.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> gaps(1 + rng() % 9);
        for (auto& g : gaps) g = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        s = update_threshold(s, Branch::fused, gaps);
        ASSERT_EQ(s.theta_of(Branch::fused), 0.02);
    }
    ThresholdState d = ThresholdState::fixed(0.02, 0.5);
    const std::vector<double> gaps{0.25, 0.5};
    d = update_threshold(d, Branch::video, gaps);
    d = update_threshold(d, Branch::video, gaps);
    EXPECT_EQ(d.theta_of(Branch::video), 0.02);
}

TEST(ThresholdTest, Errors) {
    const ThresholdState s = ThresholdState::fixed(1e-3, 0.1);
    EXPECT_EQ(code_of([&] { update_threshold(s, Branch::audio, std::span<const double>{}); }),
              ErrorCode::EmptyBatch);
    ThresholdState bad = s;
    bad.lambda = -1.0;
    const std::vector<double> gaps{0.1};
    EXPECT_EQ(code_of([&] { update_threshold(bad, Branch::audio, gaps); }), ErrorCode::InvalidConfig);
}

}// namespace
}// namespace mdaa
