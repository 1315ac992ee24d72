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
#include "mdaa/stream.hpp"

#include "mdaa/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace mdaa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index);
}

// Salt separating corruption noise from the clean draw of the same sample.
constexpr std::uint64_t kCorruptionSalt = 0x636f7272757074ULL;

Matrix draw_means(std::mt19937_64& rng, std::uint32_t classes, std::uint32_t dim, double separation) {
    std::normal_distribution<double> normal(0.0, separation / std::sqrt(static_cast<double>(dim)));
    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix means(classes, dim);
        for (Index i = 0; i < means.rows(); ++i) {
            for (Index j = 0; j < means.cols(); ++j) {
                means(i, j) = normal(rng);
            }
        }
        double min_dist = std::numeric_limits<double>::infinity();
        for (Index a = 0; a < means.rows(); ++a) {
            for (Index b = a + 1; b < means.rows(); ++b) {
                min_dist = std::min(min_dist, (means.row(a) - means.row(b)).norm());
            }
        }
        if (min_dist > 1e-9 * std::max(separation, 1e-300)) {
            return means;
        }
    }
    fail(ErrorCode::InvalidConfig, "could not draw distinct class means");
}

}// namespace

void validate(const TaskConfig& c) {
    require(c.num_classes >= 2, ErrorCode::InvalidConfig, "num_classes must be at least 2");
    require(c.audio_dim >= 1 && c.video_dim >= 1, ErrorCode::InvalidConfig, "modality dimensions must be positive");
    require(c.imbalance_ratio >= 1, ErrorCode::InvalidConfig, "imbalance_ratio must be at least 1");
    require(std::isfinite(c.class_separation) && c.class_separation > 0.0, ErrorCode::InvalidConfig,
            "class_separation must be positive");
    require(std::isfinite(c.within_class_std) && c.within_class_std >= 0.0, ErrorCode::InvalidConfig,
            "within_class_std must be non-negative");
    const auto counts = source_class_counts(c);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        require(counts[k] > 0, ErrorCode::InvalidConfig,
                "source_samples too small: class " + std::to_string(k) + " would be empty");
    }
}

SyntheticTask::SyntheticTask(const TaskConfig& config) : config_(config) {
    validate(config);
    std::mt19937_64 rng(splitmix64(config.seed));
    audio_means_ = draw_means(rng, config.num_classes, config.audio_dim, config.class_separation);
    video_means_ = draw_means(rng, config.num_classes, config.video_dim, config.class_separation);
}

void SyntheticTask::draw_class(Tag tag, std::uint64_t index, std::int32_t label, std::span<double> audio,
                               std::span<double> video) const {
    require(audio.size() == config_.audio_dim && video.size() == config_.video_dim, ErrorCode::DimensionMismatch,
            "draw: output spans have the wrong size");
    std::mt19937_64 rng(sample_seed(config_.seed, static_cast<std::uint64_t>(tag), index));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < audio.size(); ++j) {
        audio[j] = audio_means_(label, static_cast<Index>(j)) + config_.within_class_std * normal(rng);
    }
    for (std::size_t j = 0; j < video.size(); ++j) {
        video[j] = video_means_(label, static_cast<Index>(j)) + config_.within_class_std * normal(rng);
    }
}

std::int32_t SyntheticTask::draw(Tag tag, std::uint64_t index, std::span<double> audio,
                                 std::span<double> video) const {
    // Label comes from its own generator so it does not shift the feature draw.
    std::mt19937_64 label_rng(sample_seed(config_.seed, static_cast<std::uint64_t>(tag) + 0x100, index));
    std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(config_.num_classes) - 1);
    const std::int32_t label = pick(label_rng);
    draw_class(tag, index, label, audio, video);
    return label;
}

LabeledSet SyntheticTask::draw_set(Tag tag, std::uint64_t first, std::size_t count) const {
    LabeledSet set;
    set.audio.resize(static_cast<Index>(count), config_.audio_dim);
    set.video.resize(static_cast<Index>(count), config_.video_dim);
    set.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = static_cast<Index>(i);
        set.labels[i] = draw(tag, first + i, {set.audio.data() + r * set.audio.cols(), config_.audio_dim},
                             {set.video.data() + r * set.video.cols(), config_.video_dim});
    }
    return set;
}

std::vector<std::size_t> source_class_counts(const TaskConfig& c) {
    const std::size_t classes = c.num_classes;
    const std::size_t majority = (classes + 1) / 2;
    const std::size_t minority = classes - majority;
    const std::size_t per_minority = c.source_samples / (c.imbalance_ratio * majority + minority);
    std::vector<std::size_t> counts(classes, per_minority);
    for (std::size_t k = 0; k < majority; ++k) {
        counts[k] = per_minority * c.imbalance_ratio;
    }
    if (c.imbalance_ratio == 1) {
        // Balanced: spread the remainder so the total is exact.
        std::fill(counts.begin(), counts.end(), c.source_samples / classes);
        for (std::size_t k = 0; k < c.source_samples % classes; ++k) {
            ++counts[k];
        }
    }
    return counts;
}

GeneratedTask generate_task(const TaskConfig& config) {
    SyntheticTask task(config);
    const auto counts = source_class_counts(config);
    std::size_t total = 0;
    for (auto n : counts) {
        total += n;
    }

    LabeledSet source;
    source.audio.resize(static_cast<Index>(total), config.audio_dim);
    source.video.resize(static_cast<Index>(total), config.video_dim);
    source.labels.reserve(total);
    std::size_t row = 0;
    // Class-major order, then a seeded shuffle so the set is not sorted by class.
    std::vector<std::int32_t> order;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        order.insert(order.end(), counts[c], static_cast<std::int32_t>(c));
    }
    std::mt19937_64 shuffle_rng(splitmix64(config.seed ^ 0x5eedULL));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (auto label : order) {
        const auto r = static_cast<Index>(row);
        task.draw_class(SyntheticTask::Tag::source, row, label,
                        {source.audio.data() + r * source.audio.cols(), config.audio_dim},
                        {source.video.data() + r * source.video.cols(), config.video_dim});
        source.labels.push_back(label);
        ++row;
    }

    LabeledSet heldout = task.draw_set(SyntheticTask::Tag::heldout, 0, config.heldout_samples);
    return GeneratedTask{std::move(task), std::move(source), std::move(heldout)};
}

std::string_view to_string(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::additive_gaussian: return "additive_gaussian";
        case CorruptionKind::scale: return "scale";
        case CorruptionKind::dropout: return "dropout";
        case CorruptionKind::shift: return "shift";
    }
    return "unknown";
}

std::optional<CorruptionKind> parse_corruption_kind(std::string_view name) {
    for (auto k : {CorruptionKind::additive_gaussian, CorruptionKind::scale, CorruptionKind::dropout,
                   CorruptionKind::shift}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::string describe(const CorruptionSpec& spec) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s:%s:%g", std::string(to_string(spec.modality)).c_str(),
                  std::string(to_string(spec.kind)).c_str(), spec.severity);
    return buf;
}

void corrupt_in_place(std::span<double> sample, const CorruptionSpec& spec, std::mt19937_64& rng) {
    require(std::isfinite(spec.severity), ErrorCode::InvalidSeverity, "severity must be finite");
    switch (spec.kind) {
        case CorruptionKind::additive_gaussian: {
            require(spec.severity >= 0.0, ErrorCode::InvalidSeverity, "noise std must be non-negative");
            if (spec.severity == 0.0) {
                return;
            }
            std::normal_distribution<double> normal(0.0, spec.severity);
            for (auto& v : sample) {
                v += normal(rng);
            }
            return;
        }
        case CorruptionKind::scale:
            // Severity 0 is the identity here too; a factor of zero is not
            // expressible.
            if (spec.severity == 0.0) {
                return;
            }
            for (auto& v : sample) {
                v *= spec.severity;
            }
            return;
        case CorruptionKind::dropout: {
            require(spec.severity >= 0.0 && spec.severity <= 1.0, ErrorCode::InvalidSeverity,
                    "dropout probability must lie in [0, 1], got " + std::to_string(spec.severity));
            if (spec.severity == 0.0) {
                return;
            }
            std::bernoulli_distribution drop(spec.severity);
            for (auto& v : sample) {
                if (drop(rng)) {
                    v = 0.0;
                }
            }
            return;
        }
        case CorruptionKind::shift:
            for (auto& v : sample) {
                v += spec.severity;
            }
            return;
    }
}

std::vector<double> corrupt(std::span<const double> sample, const CorruptionSpec& spec, std::mt19937_64& rng) {
    std::vector<double> out(sample.begin(), sample.end());
    corrupt_in_place(out, spec, rng);
    return out;
}

std::size_t PhaseSchedule::total_samples() const {
    std::size_t total = 0;
    for (const auto& p : phases) {
        total += p.samples;
    }
    return total;
}

void validate(const PhaseSchedule& schedule) {
    std::optional<Modality> first;
    std::optional<Modality> last;
    for (std::size_t k = 0; k < schedule.phases.size(); ++k) {
        const Phase& p = schedule.phases[k];
        require(p.batch_size >= 1, ErrorCode::InvalidConfig, "phase " + std::to_string(k) + " has batch size 0");
        if (!p.corruption) {
            continue;
        }
        const Modality m = p.corruption->modality;
        if (schedule.mode == ScheduleMode::progressive_single_modality) {
            require(!first || *first == m, ErrorCode::InvalidConfig,
                    "progressive schedule corrupts more than one modality (phase " + std::to_string(k) + ")");
        } else {
            require(!last || *last != m, ErrorCode::InvalidConfig,
                    "interleaved schedule corrupts the same modality twice in a row (phase " + std::to_string(k)
                        + ")");
        }
        if (!first) {
            first = m;
        }
        last = m;
    }
}

namespace {

struct PresetPhase {
    const char* name;
    CorruptionKind kind;
    double strength;// multiplier on the family's level-5 magnitude
};

// Feature-level stand-ins for the benchmark's media corruptions.
constexpr PresetPhase kAudioPhases[] = {
    {"gaussian", CorruptionKind::additive_gaussian, 1.0}, {"traffic", CorruptionKind::shift, 1.0},
    {"crowd", CorruptionKind::dropout, 1.0},             {"rain", CorruptionKind::additive_gaussian, 0.8},
    {"thunder", CorruptionKind::scale, 1.0},             {"wind", CorruptionKind::dropout, 0.8},
};

constexpr PresetPhase kVideoPhases[] = {
    {"gaussian", CorruptionKind::additive_gaussian, 1.0},
    {"shot", CorruptionKind::additive_gaussian, 0.9},
    {"impulse", CorruptionKind::dropout, 1.0},
    {"defocus", CorruptionKind::scale, 1.0},
    {"glass", CorruptionKind::scale, 0.9},
    {"motion", CorruptionKind::additive_gaussian, 0.8},
    {"zoom", CorruptionKind::scale, 0.8},
    {"snow", CorruptionKind::shift, 1.0},
    {"frost", CorruptionKind::shift, 0.8},
    {"fog", CorruptionKind::dropout, 0.9},
    {"brightness", CorruptionKind::shift, 0.6},
    {"contrast", CorruptionKind::scale, 0.7},
    {"elastic", CorruptionKind::dropout, 0.8},
    {"pixelate", CorruptionKind::additive_gaussian, 0.7},
    {"jpeg", CorruptionKind::dropout, 0.7},
};

CorruptionSpec level_to_spec(Modality modality, const PresetPhase& p, double level, double unit) {
    const double l = level * p.strength;
    CorruptionSpec spec{modality, p.kind, 0.0};
    switch (p.kind) {
        case CorruptionKind::additive_gaussian: spec.severity = 0.8 * l * unit; break;
        case CorruptionKind::shift: spec.severity = 0.8 * l * unit; break;
        case CorruptionKind::dropout: spec.severity = std::min(0.19 * l, 0.95); break;
        case CorruptionKind::scale: spec.severity = l == 0.0 ? 0.0 : std::max(1.0 - 0.19 * l, 0.05); break;
    }
    return spec;
}

}// namespace

std::vector<std::string> preset_names() { return {"progressive-audio", "progressive-video", "interleaved", "clean"}; }

PhaseSchedule preset_schedule(std::string_view name, const PresetOptions& options) {
    require(std::isfinite(options.severity) && options.severity >= 0.0 && options.severity <= 5.0,
            ErrorCode::InvalidConfig, "severity level must lie in [0, 5]");
    require(options.batch_size >= 1, ErrorCode::InvalidConfig, "batch size must be positive");
    PhaseSchedule schedule;
    auto add = [&](Modality m, const PresetPhase& p) {
        Phase phase;
        phase.name = std::string(m == Modality::audio ? "A-" : "V-") + p.name;
        phase.corruption = level_to_spec(m, p, options.severity, options.unit);
        phase.samples = options.phase_samples;
        phase.batch_size = options.batch_size;
        schedule.phases.push_back(std::move(phase));
    };
    if (name == "progressive-audio") {
        schedule.mode = ScheduleMode::progressive_single_modality;
        for (const auto& p : kAudioPhases) {
            add(Modality::audio, p);
        }
    } else if (name == "progressive-video") {
        schedule.mode = ScheduleMode::progressive_single_modality;
        for (const auto& p : kVideoPhases) {
            add(Modality::video, p);
        }
    } else if (name == "interleaved") {
        schedule.mode = ScheduleMode::interleaved;
        for (std::size_t k = 0; k < 6; ++k) {
            if (k % 2 == 0) {
                add(Modality::audio, kAudioPhases[k / 2]);
            } else {
                add(Modality::video, kVideoPhases[k / 2]);
            }
        }
    } else if (name == "clean") {
        schedule.mode = ScheduleMode::progressive_single_modality;
        schedule.phases.push_back(Phase{"clean", std::nullopt, options.phase_samples, options.batch_size});
    } else {
        fail(ErrorCode::InvalidConfig, "unknown schedule preset \"" + std::string(name) + "\"");
    }
    if (options.backward) {
        std::reverse(schedule.phases.begin(), schedule.phases.end());
    }
    validate(schedule);
    return schedule;
}

Stream::Stream(const SyntheticTask& task, PhaseSchedule schedule) : task_(&task), schedule_(std::move(schedule)) {
    validate(schedule_);
}

std::optional<LabeledBatch> Stream::next() {
    while (phase_ < schedule_.phases.size() && offset_in_phase_ >= schedule_.phases[phase_].samples) {
        ++phase_;
        offset_in_phase_ = 0;
    }
    if (phase_ >= schedule_.phases.size()) {
        return std::nullopt;
    }
    const Phase& phase = schedule_.phases[phase_];
    const std::size_t count = std::min<std::size_t>(phase.batch_size, phase.samples - offset_in_phase_);

    LabeledBatch out;
    out.phase_index = phase_;
    out.first_sample_index = global_index_;
    LabeledSet set = task_->draw_set(SyntheticTask::Tag::target, global_index_, count);
    if (phase.corruption) {
        const CorruptionSpec& spec = *phase.corruption;
        Matrix& target = spec.modality == Modality::audio ? set.audio : set.video;
        for (std::size_t i = 0; i < count; ++i) {
            std::mt19937_64 rng(sample_seed(task_->config().seed, kCorruptionSalt, global_index_ + i));
            const auto r = static_cast<Index>(i);
            corrupt_in_place({target.data() + r * target.cols(), static_cast<std::size_t>(target.cols())}, spec, rng);
        }
    }
    out.batch = Batch{std::move(set.audio), std::move(set.video)};
    out.truth = std::move(set.labels);
    offset_in_phase_ += count;
    global_index_ += count;
    return out;
}

std::vector<LabeledBatch> batches_of(const LabeledSet& data, std::uint32_t batch_size) {
    require(batch_size >= 1, ErrorCode::InvalidConfig, "batch size must be positive");
    std::vector<LabeledBatch> out;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t count = std::min<std::size_t>(batch_size, data.size() - start);
        LabeledBatch b;
        b.first_sample_index = start;
        b.batch.audio = data.audio.middleRows(static_cast<Index>(start), static_cast<Index>(count));
        b.batch.video = data.video.middleRows(static_cast<Index>(start), static_cast<Index>(count));
        b.truth.assign(data.labels.begin() + static_cast<std::ptrdiff_t>(start),
                       data.labels.begin() + static_cast<std::ptrdiff_t>(start + count));
        out.push_back(std::move(b));
    }
    return out;
}

}// namespace mdaa
