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
#include "mdaa/harness.hpp"

#include "mdaa/error.hpp"
#include "mdaa/feature_file.hpp"
#include "mdaa/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <random>
#include <sstream>

namespace mdaa {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FeatureFile load_checked(const std::string& path, const char* role) {
    FeatureFile f = load_feature_file(path);
    require(f.data.size() > 0, ErrorCode::InvalidConfig, std::string(role) + " file " + path + " has no samples");
    return f;
}

void require_same_dims(const FeatureFile& a, const FeatureFile& b, const std::string& path) {
    require(a.data.audio.cols() == b.data.audio.cols() && a.data.video.cols() == b.data.video.cols(),
            ErrorCode::DimensionMismatch, "feature dimensions of " + path + " differ from the source file");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

}// namespace

RunData resolve_data(const RunConfig& config) {
    RunData data;
    if (config.source_file.empty()) {
        require(config.target_file.empty() && config.heldout_file.empty(), ErrorCode::InvalidConfig,
                "heldout_file and target_file need a source_file");
        GeneratedTask generated = generate_task(config.task);
        data.num_classes = config.task.num_classes;
        data.audio_dim = config.task.audio_dim;
        data.video_dim = config.task.video_dim;
        data.source = std::move(generated.source);
        data.heldout = std::move(generated.heldout);
        data.task.emplace(std::move(generated.task));
        return data;
    }

    require(!config.target_file.empty(), ErrorCode::InvalidConfig, "source_file needs a target_file");
    FeatureFile source = load_checked(config.source_file, "source");
    data.source = labeled_rows(source.data);
    require(data.source.size() == source.data.size(), ErrorCode::InvalidConfig,
            "source file " + config.source_file + " has unlabeled rows");
    data.num_classes = source.num_classes;
    data.audio_dim = static_cast<std::uint32_t>(source.data.audio.cols());
    data.video_dim = static_cast<std::uint32_t>(source.data.video.cols());
    if (!config.heldout_file.empty()) {
        FeatureFile heldout = load_checked(config.heldout_file, "heldout");
        require_same_dims(source, heldout, config.heldout_file);
        data.heldout = labeled_rows(heldout.data);
    }
    FeatureFile target = load_checked(config.target_file, "target");
    require_same_dims(source, target, config.target_file);
    for (auto label : target.data.labels) {
        require(label < static_cast<std::int32_t>(data.num_classes), ErrorCode::InvalidConfig,
                "target label " + std::to_string(label) + " is outside the source classes");
    }
    data.target = std::move(target.data);
    return data;
}

BranchArray<std::optional<ExpansionSpec>> expansion_specs(const RunConfig& config, std::uint32_t audio_dim,
                                                         std::uint32_t video_dim) {
    BranchArray<std::optional<ExpansionSpec>> specs{};
    for (auto b : kAllBranches) {
        const auto k = index_of(b);
        if (!config.branches[k]) {
            continue;
        }
        ExpansionSpec spec;
        spec.input_dim = b == Branch::audio ? audio_dim : b == Branch::video ? video_dim : audio_dim + video_dim;
        spec.expanded_dim = config.phi_override[k].value_or(config.phi);
        spec.seed = mix_seed(config.seed, 0xe0 + k);
        spec.nonlinearity = config.nonlinearity;
        spec.scale = config.expansion_scale.value_or(1.0 / std::sqrt(static_cast<double>(spec.input_dim)));
        specs[k] = spec;
    }
    return specs;
}

FusionConfig fusion_config(const RunConfig& config) {
    return FusionConfig{config.theta, config.lambda, config.top_n, config.dynamic};
}

PhaseSchedule schedule_for(const RunConfig& config) {
    PresetOptions options;
    options.severity = config.severity;
    options.phase_samples = config.phase_samples;
    options.batch_size = config.batch_size;
    options.backward = config.backward;
    options.unit = config.task.within_class_std;
    PhaseSchedule schedule = preset_schedule(config.schedule, options);
    std::erase_if(schedule.phases, [](const Phase& p) { return p.samples == 0; });
    return schedule;
}

InitResult run_init(const RunConfig& config, const RunData& data) {
    validate(config);
    const SourceData source{data.source.audio, data.source.video, data.source.labels};
    MdaaModel model = MdaaModel::initialize(expansion_specs(config, data.audio_dim, data.video_dim), source,
                                            data.num_classes, config.gamma, fusion_config(config));
    model.set_gate_bypass(config.bypass_gate);
    model.set_poisoned_branch(config.poison);
    const double accuracy = data.heldout.size() > 0 ? evaluate_accuracy(model, data.heldout) : 0.0;
    return InitResult{std::move(model), accuracy};
}

AdaptResult run_adapt(MdaaModel& model, const RunConfig& config, const RunData& data) {
    validate(config);
    model.set_gate_bypass(config.bypass_gate);
    model.set_poisoned_branch(config.poison);
    std::optional<ResourceProbe> probe;
    if (config.timing) {
        probe.emplace();
    }

    ForgettingMeter meter;
    if (data.heldout.size() > 0) {
        meter.record_baseline(model, data.heldout);
    }

    AdaptResult result;
    std::vector<LabeledBatch> batches;
    std::optional<Stream> stream;
    if (data.target) {
        result.log.phases.push_back(PhaseInfo{"target", ""});
        batches = batches_of(*data.target, config.batch_size);
    } else {
        PhaseSchedule schedule = schedule_for(config);
        for (const auto& p : schedule.phases) {
            result.log.phases.push_back(PhaseInfo{p.name, p.corruption ? describe(*p.corruption) : ""});
        }
        stream.emplace(*data.task, std::move(schedule));
    }

    std::size_t next_batch = 0;
    auto pull = [&]() -> std::optional<LabeledBatch> {
        if (stream) {
            return stream->next();
        }
        if (next_batch < batches.size()) {
            return std::move(batches[next_batch++]);
        }
        return std::nullopt;
    };

    std::vector<std::vector<AdaptationEvent>> phase_events(result.log.phases.size());
    std::vector<std::vector<std::int32_t>> phase_truth(result.log.phases.size());
    while (auto lb = pull()) {
        auto events = model.infer_and_adapt(lb->batch, lb->first_sample_index);
        for (std::size_t i = 0; i < events.size(); ++i) {
            result.log.records.push_back(EventRecord{events[i], lb->truth[i], lb->phase_index});
            phase_events[lb->phase_index].push_back(std::move(events[i]));
            phase_truth[lb->phase_index].push_back(lb->truth[i]);
        }
    }

    std::vector<PhaseReport> phases;
    for (std::size_t k = 0; k < phase_events.size(); ++k) {
        if (phase_events[k].empty()) {
            continue;
        }
        phases.push_back(score_phase(phase_events[k], phase_truth[k], k, result.log.phases[k].name,
                                     result.log.phases[k].corruption));
    }
    result.report = make_run_report(std::move(phases));
    if (meter.initialized()) {
        result.report.source_accuracy = meter.baseline();
        result.report.forgetting = meter.measure(model, data.heldout);
        result.log.source_accuracy = result.report.source_accuracy;
        result.log.forgetting = result.report.forgetting;
    }
    if (probe) {
        result.report.wall_seconds = probe->elapsed_seconds();
        result.report.peak_rss_bytes = probe->peak_rss_delta_bytes();
    }
    return result;
}

AdaptResult run_full(const RunConfig& config, const RunData& data) {
    InitResult init = run_init(config, data);
    return run_adapt(init.model, config, data);
}

AdaptResult run_full(const RunConfig& config) {
    validate(config);
    return run_full(config, resolve_data(config));
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::theta: return "theta";
        case SweepAxis::n: return "n";
        case SweepAxis::gamma: return "gamma";
        case SweepAxis::lambda: return "lambda";
    }
    return "unknown";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
    if (name == "theta") return SweepAxis::theta;
    if (name == "n" || name == "top_n") return SweepAxis::n;
    if (name == "gamma") return SweepAxis::gamma;
    if (name == "lambda") return SweepAxis::lambda;
    return std::nullopt;
}

RunConfig with_axis_value(RunConfig config, SweepAxis axis, double value) {
    require(std::isfinite(value), ErrorCode::InvalidConfig, "sweep values must be finite");
    switch (axis) {
        case SweepAxis::theta: config.theta = value; break;
        case SweepAxis::gamma: config.gamma = value; break;
        case SweepAxis::lambda: config.lambda = value; break;
        case SweepAxis::n:
            require(value >= 1.0 && value == std::floor(value), ErrorCode::InvalidN,
                    "n must be a positive integer, got " + format_double(value));
            config.top_n = static_cast<std::uint32_t>(value);
            break;
    }
    validate(config);
    return config;
}

std::vector<SweepEntry> run_sweep(const RunConfig& config, SweepAxis axis, std::span<const double> values) {
    std::vector<RunConfig> configs;
    for (double v : values) {
        configs.push_back(with_axis_value(config, axis, v));
    }
    if (configs.empty()) {
        return {};
    }
    // Data depends on neither axis, so every value sees the same samples.
    const RunData data = resolve_data(config);
    std::vector<SweepEntry> entries;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        SweepEntry entry;
        entry.value = values[i];
        try {
            entry.report = run_full(configs[i], data).report;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotPositiveDefinite && e.code() != ErrorCode::NonFiniteInput) {
                throw;
            }
            entry.error = e.what();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::string emit_sweep(std::span<const SweepEntry> entries, SweepAxis axis, ReportFormat format) {
    const std::string axis_name(to_string(axis));
    std::ostringstream out;
    switch (format) {
        case ReportFormat::json_lines:
            for (const auto& e : entries) {
                nlohmann::json o;
                o["type"] = "sweep";
                o["axis"] = axis_name;
                o["value"] = e.value;
                if (e.report) {
                    o["average_top1"] = e.report->average_top1;
                    if (e.report->source_accuracy) o["source_accuracy"] = *e.report->source_accuracy;
                    if (e.report->forgetting) o["forgetting"] = *e.report->forgetting;
                    nlohmann::json phases = nlohmann::json::array();
                    for (const auto& p : e.report->phases) phases.push_back(p.top1);
                    o["phase_top1"] = std::move(phases);
                } else {
                    o["error"] = e.error;
                }
                out << o.dump() << '\n';
            }
            break;
        case ReportFormat::csv:
            out << axis_name << ",average_top1,source_accuracy,forgetting,error\n";
            for (const auto& e : entries) {
                out << format_double(e.value) << ',';
                if (e.report) {
                    out << e.report->average_top1 << ',';
                    if (e.report->source_accuracy) out << *e.report->source_accuracy;
                    out << ',';
                    if (e.report->forgetting) out << *e.report->forgetting;
                    out << ",\n";
                } else {
                    out << ",,," << '"' << e.error << "\"\n";
                }
            }
            break;
        case ReportFormat::table_text: {
            out << axis_name << "\tAvg. top1\tSource\tForgetting\n";
            for (const auto& e : entries) {
                out << format_double(e.value) << '\t';
                if (!e.report) {
                    out << "error: " << e.error << '\n';
                    continue;
                }
                out << percent(e.report->average_top1) << '\t'
                    << (e.report->source_accuracy ? percent(*e.report->source_accuracy) : "-") << '\t'
                    << (e.report->forgetting ? percent(*e.report->forgetting) : "-") << '\n';
            }
            break;
        }
    }
    return out.str();
}

ComplexityReport measure_complexity(std::span<const std::uint32_t> phis, std::uint32_t repetitions,
                                    std::uint64_t seed) {
    require(!phis.empty() && repetitions >= 1, ErrorCode::InvalidConfig, "complexity needs sizes and repetitions");
    ComplexityReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double log_sum = 0.0;
    for (auto phi : phis) {
        require(phi >= 1, ErrorCode::InvalidConfig, "phi must be positive");
        Matrix x(2 * static_cast<Index>(phi), phi);
        for (Index i = 0; i < x.rows(); ++i)
            for (Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
        Matrix p = Matrix::Identity(phi, phi);
        rank_k_update_in_place(p, x);

        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t r = 0; r < repetitions; ++r) {
            const auto start = std::chrono::steady_clock::now();
            SpdFactor f = spd_factorize(p);
            const auto stop = std::chrono::steady_clock::now();
            require(f.dimension() == phi, ErrorCode::DimensionMismatch, "factor size");
            best = std::min(best, std::chrono::duration<double>(stop - start).count());
        }
        report.points.push_back(ComplexityPoint{phi, best, 0.0});
        log_sum += std::log(best / std::pow(static_cast<double>(phi), 3));
    }
    report.constant = std::exp(log_sum / static_cast<double>(report.points.size()));
    report.within_factor_two = true;
    for (auto& point : report.points) {
        point.ratio = point.seconds / (report.constant * std::pow(static_cast<double>(point.phi), 3));
        report.within_factor_two = report.within_factor_two && point.ratio >= 0.5 && point.ratio <= 2.0;
    }
    return report;
}

std::string emit_complexity(const ComplexityReport& report, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::json_lines:
            for (const auto& p : report.points) {
                nlohmann::json o{{"type", "factorization"}, {"phi", p.phi}, {"seconds", p.seconds},
                                 {"ratio", p.ratio}};
                out << o.dump() << '\n';
            }
            out << nlohmann::json{{"type", "fit"},
                                  {"constant", report.constant},
                                  {"within_factor_two", report.within_factor_two}}
                       .dump()
                << '\n';
            break;
        case ReportFormat::csv:
            out << "phi,seconds,ratio\n";
            for (const auto& p : report.points) out << p.phi << ',' << p.seconds << ',' << p.ratio << '\n';
            break;
        case ReportFormat::table_text:
            out << "phi\tseconds\tt/(c*phi^3)\n";
            for (const auto& p : report.points) {
                out << p.phi << '\t' << format_double(p.seconds) << '\t' << format_double(p.ratio) << '\n';
            }
            out << "c = " << format_double(report.constant) << " s, cubic fit within 2x: "
                << (report.within_factor_two ? "yes" : "no") << '\n';
            break;
    }
    return out.str();
}

}// namespace mdaa
