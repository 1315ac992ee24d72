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
#include "mdaa/binary_io.hpp"
#include "mdaa/feature_file.hpp"
#include "mdaa/metrics.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace mdaa {
namespace {

namespace fs = std::filesystem;

const std::string kSmall =
    " --set num_classes=3 --set audio_dim=4 --set video_dim=4 --set source_samples=90"
    " --set heldout_samples=30 --phi 16 --phase-samples 20 --batch-size 8";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::path(::testing::TempDir()) / "mdaa_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    int run(const std::string& args) const {
        const std::string cmd = std::string(MDAA_CLI) + " " + args + " > " + path("stdout.txt") + " 2> "
                                + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string slurp(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

TEST_F(CliTest, ShowConfig) {
    EXPECT_EQ(run("show-config --theta 0.05"), 0);
    EXPECT_NE(slurp("stdout.txt").find("theta = 0.050000000000000003"), std::string::npos);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
    EXPECT_EQ(run("run --gamma 0" + kSmall), 2);
    EXPECT_NE(slurp("stderr.txt").find("gamma"), std::string::npos);
    EXPECT_EQ(run("run --set bogus=1"), 2);
    EXPECT_EQ(run("run --no-such-flag"), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("sweep --axis phi --values 1,2" + kSmall), 2);
    EXPECT_EQ(run("run --top-n 4" + kSmall), 2);
}

TEST_F(CliTest, IoErrorsExitThree) {
    EXPECT_EQ(run("adapt --snapshot " + path("missing.snap") + kSmall), 3);
    std::ofstream(path("junk.snap")) << "not a snapshot";
    EXPECT_EQ(run("adapt --snapshot " + path("junk.snap") + kSmall), 3);
    EXPECT_EQ(run("score " + path("missing.jsonl")), 3);
    EXPECT_EQ(run("run -c " + path("missing.cfg")), 3);
}

TEST_F(CliTest, NonFiniteFeaturesExitFour) {
    FeatureFile f;
    f.num_classes = 2;
    f.data.audio = Matrix::Ones(4, 2);
    f.data.video = Matrix::Ones(4, 2);
    f.data.audio(1, 1) = NAN;
    f.data.labels = {0, 1, 0, 1};
    write_file_bytes(path("nan.aexf"), encode_feature_file(f));
    f.data.audio(1, 1) = 0.5;
    write_file_bytes(path("ok.aexf"), encode_feature_file(f));
    EXPECT_EQ(run("run --phi 8 --set source_file=" + path("ok.aexf") + " --set target_file=" + path("nan.aexf")), 4);
}

TEST_F(CliTest, InitAdaptScore) {
    const std::string snap = " --snapshot " + path("model.snap");
    ASSERT_EQ(run("init" + snap + kSmall), 0);
    ASSERT_TRUE(fs::exists(path("model.snap")));
    ASSERT_EQ(run("adapt --format json_lines --events " + path("events.jsonl") + " --out " + path("adapt.jsonl")
                  + snap + kSmall),
              0);
    EXPECT_TRUE(fs::exists(path("model.snap.adapted")));
    ASSERT_EQ(run("score --format json_lines --out " + path("score.jsonl") + " " + path("events.jsonl")), 0);
    EXPECT_EQ(slurp("score.jsonl"), slurp("adapt.jsonl"));

    ASSERT_EQ(run("run --format json_lines --out " + path("run.jsonl") + kSmall), 0);
    EXPECT_EQ(slurp("run.jsonl"), slurp("adapt.jsonl"));
    const auto report = parse_json_lines(slurp("run.jsonl"));
    EXPECT_EQ(report.phases.size(), 6u);
}

TEST_F(CliTest, ConfigFileAndOverridesCompose) {
    std::ofstream(path("run.cfg")) << "theta = 0.5\nschedule = clean\n";
    ASSERT_EQ(run("show-config -c " + path("run.cfg") + " --theta 0.25"), 0);
    const auto text = slurp("stdout.txt");
    EXPECT_NE(text.find("theta = 0.25"), std::string::npos);
    EXPECT_NE(text.find("schedule = clean"), std::string::npos);
}

TEST_F(CliTest, SweepAndOracle) {
    ASSERT_EQ(run("sweep --axis theta --values 0.001,0.1 --format csv --out " + path("sweep.csv") + kSmall), 0);
    const auto csv = slurp("sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_EQ(run("oracle --phis 4,8 --classes 2 --cases 4 --source-samples 20 --max-batches 5 --out "
                  + path("oracle.json")),
              0);
    EXPECT_EQ(run("oracle --phis 64 --classes 2 --cases 1 --source-samples 8 --max-batches 2 --gamma 0"
                  " --no-adversarial"),
              1);
}

}// namespace
}// namespace mdaa
