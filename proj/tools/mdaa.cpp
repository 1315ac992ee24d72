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
#include "mdaa/binary_io.hpp"
#include "mdaa/config.hpp"
#include "mdaa/error.hpp"
#include "mdaa/event_log.hpp"
#include "mdaa/harness.hpp"
#include "mdaa/oracle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;
constexpr int kNumericalError = 4;
constexpr int kInternalError = 5;

int exit_code_of(mdaa::ErrorCode code) {
    using mdaa::ErrorCode;
    switch (code) {
        case ErrorCode::Io:
        case ErrorCode::CorruptSnapshot:
        case ErrorCode::CorruptFeatureFile: return kIoError;
        case ErrorCode::NotPositiveDefinite:
        case ErrorCode::NonFiniteInput: return kNumericalError;
        case ErrorCode::DimensionMismatch:
        case ErrorCode::InvalidSpec:
        case ErrorCode::EmptyClass:
        case ErrorCode::InvalidN:
        case ErrorCode::InvalidSeverity:
        case ErrorCode::InvalidConfig:
        case ErrorCode::LengthMismatch: return kConfigError;
        case ErrorCode::EmptyInput:
        case ErrorCode::EmptyBatch:
        case ErrorCode::NotInitialized: return kInternalError;
    }
    return kInternalError;
}

/// Flags that override config keys. Each one is stored as text and fed
/// through the same parser as the config file.
struct Overrides {
    std::string config_path;
    std::vector<std::string> assignments;
    std::vector<std::pair<std::string, std::string>> flags;
    std::vector<std::pair<std::string, std::optional<std::string>>> slots;

    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
        slots.emplace_back(key, std::nullopt);
        app.add_option("--" + flag, slots.back().second, help + " (config key " + key + ")");
    }

    mdaa::RunConfig resolve() const {
        mdaa::RunConfig config;
        if (!config_path.empty()) {
            config = mdaa::load_config(config_path);
        }
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) {
                mdaa::fail(mdaa::ErrorCode::InvalidConfig, "--set expects key=value, got \"" + a + "\"");
            }
            mdaa::apply_config_value(config, a.substr(0, eq), a.substr(eq + 1));
        }
        for (const auto& [key, value] : slots) {
            if (value) {
                mdaa::apply_config_value(config, key, *value);
            }
        }
        return config;
    }
};

void add_common(CLI::App& app, Overrides& o) {
    // Slots must not move once CLI11 holds pointers into them.
    o.slots.reserve(32);
    app.add_option("-c,--config", o.config_path, "key = value config file");
    app.add_option("--set", o.assignments, "extra key=value overrides, applied after the file");
    o.add(app, "seed", "seed", "master seed");
    o.add(app, "gamma", "gamma", "ridge regularizer");
    o.add(app, "theta", "theta", "gate threshold (initial value when dynamic)");
    o.add(app, "lambda", "lambda", "dynamic threshold step");
    o.add(app, "dynamic", "dynamic", "true for the dynamic threshold");
    o.add(app, "top-n", "top_n", "soft label width");
    o.add(app, "phi", "phi", "expanded feature size");
    o.add(app, "schedule", "schedule", "preset: progressive-audio, progressive-video, interleaved, clean");
    o.add(app, "severity", "severity", "corruption level in [0, 5]");
    o.add(app, "phase-samples", "phase_samples", "samples per phase");
    o.add(app, "batch-size", "batch_size", "test batch size");
    o.add(app, "direction", "direction", "forward or backward phase order");
    o.add(app, "gate", "gate", "dlfm or bypass");
    o.add(app, "poison", "poison", "ablation: branch trained on adversarial hard labels, or none");
    o.add(app, "out", "out", "report path, stdout when empty");
    o.add(app, "format", "format", "json_lines, table_text or csv");
    o.add(app, "snapshot", "snapshot", "snapshot path");
    o.add(app, "events", "events", "event log path");
    o.add(app, "timing", "timing", "add wall time and memory to the report");
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    mdaa::write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::string& path) {
    const auto bytes = mdaa::read_file_bytes(path);
    return {bytes.begin(), bytes.end()};
}

void finish_run(const mdaa::RunConfig& config, const mdaa::AdaptResult& result) {
    write_output(config.out, mdaa::emit_report(result.report, config.format));
    if (!config.events.empty()) {
        write_output(config.events, mdaa::encode_event_log(result.log));
    }
}

int cmd_init(const mdaa::RunConfig& config) {
    mdaa::validate(config);
    const mdaa::RunData data = mdaa::resolve_data(config);
    mdaa::InitResult init = mdaa::run_init(config, data);
    mdaa::write_file_bytes(config.snapshot, init.model.snapshot());
    std::printf("snapshot: %s\n", config.snapshot.c_str());
    if (data.heldout.size() > 0) {
        std::printf("source accuracy: %.2f%% on %zu held-out samples\n", 100.0 * init.source_accuracy,
                    data.heldout.size());
    }
    return kOk;
}

int cmd_adapt(const mdaa::RunConfig& config, const std::string& save_path) {
    mdaa::validate(config);
    mdaa::MdaaModel model = mdaa::MdaaModel::restore(mdaa::read_file_bytes(config.snapshot));
    const mdaa::RunData data = mdaa::resolve_data(config);
    const mdaa::AdaptResult result = mdaa::run_adapt(model, config, data);
    finish_run(config, result);
    mdaa::write_file_bytes(save_path.empty() ? config.snapshot + ".adapted" : save_path, model.snapshot());
    return kOk;
}

int cmd_run(const mdaa::RunConfig& config) {
    finish_run(config, mdaa::run_full(config));
    return kOk;
}

int cmd_sweep(const mdaa::RunConfig& config, const std::string& axis_name, const std::vector<double>& values) {
    const auto axis = mdaa::parse_sweep_axis(axis_name);
    if (!axis) {
        mdaa::fail(mdaa::ErrorCode::InvalidConfig, "unknown sweep axis \"" + axis_name + "\"");
    }
    mdaa::validate(config);
    const auto entries = mdaa::run_sweep(config, *axis, values);
    write_output(config.out, mdaa::emit_sweep(entries, *axis, config.format));
    return kOk;
}

int cmd_oracle(const mdaa::OracleConfig& oracle, const std::string& out) {
    const mdaa::OracleReport report = mdaa::run_oracle(oracle);
    write_output(out, mdaa::oracle_report_json(report) + "\n");
    std::fprintf(stderr, "oracle: %zu cases, max rel error %.3g, %s\n", report.cases.size(), report.max_rel_error,
                 report.passed ? "pass" : "FAIL");
    return report.passed ? kOk : kCheckFailed;
}

int cmd_complexity(const std::vector<std::uint32_t>& phis, std::uint32_t repetitions, const mdaa::RunConfig& config) {
    const auto report = mdaa::measure_complexity(phis, repetitions, config.seed);
    write_output(config.out, mdaa::emit_complexity(report, config.format));
    return report.within_factor_two ? kOk : kCheckFailed;
}

int cmd_score(const mdaa::RunConfig& config, const std::string& events_path) {
    const mdaa::EventLog log = mdaa::decode_event_log(read_text(events_path));
    write_output(config.out, mdaa::emit_report(mdaa::score_log(log), config.format));
    return kOk;
}

}// namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-modal continual test-time adaptation with analytic classifiers"};
    app.require_subcommand(1);

    Overrides init_o, adapt_o, run_o, sweep_o, complexity_o, score_o, show_o;

    auto* init = app.add_subcommand("init", "fit the source model and write a snapshot");
    add_common(*init, init_o);

    auto* adapt = app.add_subcommand("adapt", "restore a snapshot, stream the schedule, report");
    add_common(*adapt, adapt_o);
    std::string save_path;
    adapt->add_option("--save", save_path, "where to write the adapted snapshot (default <snapshot>.adapted)");

    auto* run = app.add_subcommand("run", "init and adapt in one go, no files in between");
    add_common(*run, run_o);

    auto* sweep = app.add_subcommand("sweep", "one full run per value of a hyperparameter");
    add_common(*sweep, sweep_o);
    std::string axis;
    std::vector<double> values;
    sweep->add_option("--axis", axis, "theta, n, gamma or lambda")->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

    auto* oracle = app.add_subcommand("oracle", "check recursive updates against a brute-force joint solve");
    mdaa::OracleConfig oracle_cfg;
    std::string oracle_out;
    oracle->add_option("--phis", oracle_cfg.phis, "expanded sizes, at most 256")->delimiter(',');
    oracle->add_option("--classes", oracle_cfg.classes, "class counts")->delimiter(',');
    oracle->add_option("--cases", oracle_cfg.cases, "randomized cases");
    oracle->add_option("--source-samples", oracle_cfg.source_samples, "source set size");
    oracle->add_option("--max-batches", oracle_cfg.max_batches, "upper bound on target batches");
    oracle->add_option("--max-batch-size", oracle_cfg.max_batch_size, "upper bound on batch size");
    oracle->add_option("--gamma", oracle_cfg.gamma, "ridge regularizer");
    oracle->add_option("--tolerance", oracle_cfg.tolerance, "relative Frobenius tolerance");
    oracle->add_option("--seed", oracle_cfg.seed, "seed");
    oracle->add_flag("!--no-adversarial", oracle_cfg.adversarial, "skip duplicated-column and repeated-sample cases");
    oracle->add_option("--out", oracle_out, "report path, stdout when empty");

    auto* complexity = app.add_subcommand("complexity", "time one factorization per size and fit a cubic");
    add_common(*complexity, complexity_o);
    std::vector<std::uint32_t> phis{128, 256, 512};
    std::uint32_t repetitions = 5;
    complexity->add_option("--sizes", phis, "expanded sizes")->delimiter(',');
    complexity->add_option("--repetitions", repetitions, "timed runs per size, fastest kept");

    auto* score = app.add_subcommand("score", "rebuild a report from an event log");
    add_common(*score, score_o);
    std::string events_path;
    score->add_option("log", events_path, "event log written by adapt or run")->required();

    auto* show = app.add_subcommand("show-config", "print the resolved configuration");
    add_common(*show, show_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version come through here with a zero status.
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (init->parsed()) return cmd_init(init_o.resolve());
        if (adapt->parsed()) return cmd_adapt(adapt_o.resolve(), save_path);
        if (run->parsed()) return cmd_run(run_o.resolve());
        if (sweep->parsed()) return cmd_sweep(sweep_o.resolve(), axis, values);
        if (oracle->parsed()) return cmd_oracle(oracle_cfg, oracle_out);
        if (complexity->parsed()) return cmd_complexity(phis, repetitions, complexity_o.resolve());
        if (score->parsed()) return cmd_score(score_o.resolve(), events_path);
        if (show->parsed()) {
            const auto config = show_o.resolve();
            mdaa::validate(config);
            std::cout << mdaa::to_config_text(config);
            return kOk;
        }
    } catch (const mdaa::Error& e) {
        std::cerr << "mdaa: " << mdaa::to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code_of(e.code());
    } catch (const std::exception& e) {
        std::cerr << "mdaa: " << e.what() << '\n';
        return kInternalError;
    }
    return kInternalError;
}
