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
#include "mdaa/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdaa {

void validate(const FusionConfig& config, std::size_t num_classes) {
    require(std::isfinite(config.theta_ini) && config.theta_ini >= 0.0, ErrorCode::InvalidConfig,
            "theta must be finite and non-negative");
    require(std::isfinite(config.lambda) && config.lambda >= 0.0, ErrorCode::InvalidConfig,
            "lambda must be finite and non-negative");
    require(config.top_n >= 1 && config.top_n <= num_classes, ErrorCode::InvalidN,
            "top_n must lie in [1, " + std::to_string(num_classes) + "]");
}

namespace {

Matrix concat_columns(const Matrix& left, const Matrix& right) {
    Matrix out(left.rows(), left.cols() + right.cols());
    out << left, right;
    return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = m.row(rows[i]);
    }
    return out;
}

}// namespace

MdaaModel MdaaModel::initialize(const BranchArray<std::optional<ExpansionSpec>>& specs, const SourceData& source,
                                std::size_t num_classes, double gamma, const FusionConfig& fusion) {
    require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::InvalidConfig, "gamma must be positive");
    validate(fusion, num_classes);
    const auto n = static_cast<Index>(source.labels.size());
    require(source.audio.rows() == n && source.video.rows() == n, ErrorCode::DimensionMismatch,
            "source audio, video and labels must have the same number of rows");

    const ClassWeights weights = compute_class_weights(source.labels, num_classes);

    MdaaModel model;
    model.num_classes_ = num_classes;
    model.fusion_ = fusion;
    model.thresholds_ = ThresholdState::fixed(fusion.theta_ini, fusion.lambda);

    bool any = false;
    for (auto b : kAllBranches) {
        const auto& spec = specs[index_of(b)];
        if (!spec) {
            continue;
        }
        any = true;
        Expansion expansion = Expansion::build(*spec);
        Matrix raw = b == Branch::audio   ? source.audio
                     : b == Branch::video ? source.video
                                          : concat_columns(source.audio, source.video);
        Matrix features = expansion.expand(raw);
        AnalyticClassifier ac = AnalyticClassifier::init_source(b, features, source.labels, weights, gamma);
        ac.resolve();
        model.units_[index_of(b)].emplace(Unit{std::move(expansion), std::move(ac)});
    }
    require(any, ErrorCode::InvalidConfig, "at least one branch must be configured");
    return model;
}

const AnalyticClassifier& MdaaModel::classifier(Branch b) const {
    require(has_branch(b), ErrorCode::InvalidConfig, "branch " + std::string(to_string(b)) + " is not configured");
    return units_[index_of(b)]->classifier;
}

AnalyticClassifier& MdaaModel::classifier(Branch b) {
    require(has_branch(b), ErrorCode::InvalidConfig, "branch " + std::string(to_string(b)) + " is not configured");
    return units_[index_of(b)]->classifier;
}

const Expansion& MdaaModel::expansion(Branch b) const {
    require(has_branch(b), ErrorCode::InvalidConfig, "branch " + std::string(to_string(b)) + " is not configured");
    return units_[index_of(b)]->expansion;
}

void MdaaModel::check_batch(const Batch& batch) const {
    require(batch.audio.rows() == batch.video.rows(), ErrorCode::DimensionMismatch,
            "batch audio and video row counts differ");
    require(batch.size() > 0, ErrorCode::EmptyBatch, "batch has no samples");
}

Matrix MdaaModel::expand(Branch b, const Batch& batch) const {
    const Expansion& e = expansion(b);
    switch (b) {
        case Branch::audio: return e.expand(batch.audio);
        case Branch::video: return e.expand(batch.video);
        case Branch::fused: return e.expand(concat_columns(batch.audio, batch.video));
    }
    return {};
}

MdaaModel::BatchPass MdaaModel::run_pass(const Batch& batch, std::size_t first_sample_index) const {
    check_batch(batch);
    BatchPass pass;
    BranchArray<Matrix> probs;
    for (auto b : kAllBranches) {
        if (!has_branch(b)) {
            continue;
        }
        pass.features[index_of(b)] = expand(b, batch);
        probs[index_of(b)] = units_[index_of(b)]->classifier.predict_probs(pass.features[index_of(b)]);
    }

    const Index rows = batch.size();
    pass.events.reserve(static_cast<std::size_t>(rows));
    std::vector<BranchProbs> sample_rows;
    for (Index r = 0; r < rows; ++r) {
        sample_rows.clear();
        AdaptationEvent ev;
        ev.sample_index = first_sample_index + static_cast<std::size_t>(r);
        for (auto b : kAllBranches) {
            if (!has_branch(b)) {
                continue;
            }
            const Matrix& p = probs[index_of(b)];
            std::span<const double> row(p.data() + r * p.cols(), static_cast<std::size_t>(p.cols()));
            sample_rows.push_back({b, row});
            ev.ac_prediction[index_of(b)] = argmax(row);
        }
        const Election election = elect_leader(sample_rows);
        ev.map = election.map;
        ev.leader = election.leader;
        const Matrix& leader_probs = probs[index_of(election.leader)];
        std::span<const double> leader_row(leader_probs.data() + r * leader_probs.cols(),
                                           static_cast<std::size_t>(leader_probs.cols()));
        ev.prediction = argmax(leader_row);
        ev.soft_label = build_soft_label(leader_row, fusion_.top_n, num_classes_);
        pass.least_likely.push_back(
            static_cast<std::uint32_t>(std::min_element(leader_row.begin(), leader_row.end()) - leader_row.begin()));
        for (auto b : kAllBranches) {
            if (!has_branch(b)) {
                continue;
            }
            GateDecision g = gate_decision(b, election.leader_map(), *election.map[index_of(b)], thresholds_.theta_of(b));
            if (bypass_gate_) {
                g.accepted = true;
            }
            ev.gates[index_of(b)] = g;
        }
        pass.events.push_back(std::move(ev));
    }
    return pass;
}

std::vector<AdaptationEvent> MdaaModel::infer_and_adapt(const Batch& batch, std::size_t first_sample_index) {
    for (auto& unit : units_) {
        if (unit) {
            unit->classifier.resolve();
        }
    }
    BatchPass pass = run_pass(batch, first_sample_index);

    for (auto b : kAllBranches) {
        if (!has_branch(b)) {
            continue;
        }
        std::vector<Index> accepted;
        for (std::size_t r = 0; r < pass.events.size(); ++r) {
            if (pass.events[r].gates[index_of(b)]->accepted) {
                accepted.push_back(static_cast<Index>(r));
            }
        }
        if (!accepted.empty()) {
            Matrix labels(static_cast<Index>(accepted.size()), static_cast<Index>(num_classes_));
            const bool poisoned = poisoned_ == b;
            for (std::size_t i = 0; i < accepted.size(); ++i) {
                const auto r = static_cast<std::size_t>(accepted[i]);
                labels.row(static_cast<Index>(i)) = poisoned ? SoftLabel{{pass.least_likely[r]}, {1.0}}.densify(num_classes_)
                                                             : pass.events[r].soft_label.densify(num_classes_);
            }
            units_[index_of(b)]->classifier.adapt(gather_rows(pass.features[index_of(b)], accepted), labels);
        }
        if (fusion_.dynamic) {
            std::vector<double> gaps;
            gaps.reserve(pass.events.size());
            for (const auto& ev : pass.events) {
                gaps.push_back(ev.gates[index_of(b)]->leader_map - ev.gates[index_of(b)]->ac_map);
            }
            thresholds_ = update_threshold(thresholds_, b, gaps);
        }
    }
    return std::move(pass.events);
}

std::vector<std::uint32_t> MdaaModel::infer_only(const Batch& batch) const {
    const BatchPass pass = run_pass(batch, 0);
    std::vector<std::uint32_t> predictions;
    predictions.reserve(pass.events.size());
    for (const auto& ev : pass.events) {
        predictions.push_back(ev.prediction);
    }
    return predictions;
}

std::vector<AdaptationEvent> MdaaModel::trace(const Batch& batch, std::size_t first_sample_index) const {
    return run_pass(batch, first_sample_index).events;
}

std::vector<std::uint8_t> MdaaModel::snapshot() const {
    ByteWriter out;
    out.magic("MDAM");
    out.put<std::uint16_t>(kSnapshotVersion);
    std::uint8_t count = 0;
    for (const auto& unit : units_) {
        count += unit ? 1 : 0;
    }
    out.put<std::uint8_t>(count);
    for (auto b : kAllBranches) {
        if (!has_branch(b)) {
            continue;
        }
        const Unit& unit = *units_[index_of(b)];
        const ExpansionSpec& spec = unit.expansion.spec();
        out.put<std::uint8_t>(static_cast<std::uint8_t>(b));
        out.put<std::uint32_t>(spec.input_dim);
        out.put<std::uint32_t>(spec.expanded_dim);
        out.put<std::uint64_t>(spec.seed);
        out.put<std::uint8_t>(static_cast<std::uint8_t>(spec.nonlinearity));
        out.put<double>(spec.scale);
        serialize(unit.classifier.bank(), out);
        out.put<double>(thresholds_.theta_of(b));
        out.put<double>(fusion_.theta_ini);
        out.put<double>(fusion_.lambda);
        out.put<std::uint32_t>(fusion_.top_n);
        out.put<std::uint8_t>(fusion_.dynamic ? 1 : 0);
        const auto& gap = thresholds_.previous_gap[index_of(b)];
        out.put<std::uint8_t>(gap ? 1 : 0);
        out.put<double>(gap.value_or(0.0));
    }
    return out.take();
}

MdaaModel MdaaModel::restore(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, ErrorCode::CorruptSnapshot);
    in.expect_magic("MDAM");
    const auto version = in.get<std::uint16_t>();
    require(version == 1 || version == kSnapshotVersion, ErrorCode::CorruptSnapshot,
            "unsupported snapshot version " + std::to_string(version));
    const auto count = in.get<std::uint8_t>();
    require(count >= 1 && count <= kBranchCount, ErrorCode::CorruptSnapshot,
            "branch count " + std::to_string(count) + " out of range");

    MdaaModel model;
    std::optional<FusionConfig> fusion;
    BranchArray<double> theta{};
    BranchArray<std::optional<double>> gaps{};
    for (std::uint8_t i = 0; i < count; ++i) {
        const auto id = in.get<std::uint8_t>();
        require(id < kBranchCount, ErrorCode::CorruptSnapshot, "unknown branch id " + std::to_string(id));
        const auto b = static_cast<Branch>(id);
        require(!model.has_branch(b), ErrorCode::CorruptSnapshot, "duplicate branch id " + std::to_string(id));

        ExpansionSpec spec;
        spec.input_dim = in.get<std::uint32_t>();
        spec.expanded_dim = in.get<std::uint32_t>();
        spec.seed = in.get<std::uint64_t>();
        const auto nonlinearity = in.get<std::uint8_t>();
        require(nonlinearity <= 1, ErrorCode::CorruptSnapshot, "unknown nonlinearity");
        spec.nonlinearity = static_cast<Nonlinearity>(nonlinearity);
        spec.scale = in.get<double>();
        MemoryBank bank = deserialize_bank(in);
        require(bank.dimension() == spec.expanded_dim, ErrorCode::CorruptSnapshot,
                "memory bank dimension does not match the expansion");

        FusionConfig f;
        theta[id] = in.get<double>();
        f.theta_ini = in.get<double>();
        f.lambda = in.get<double>();
        f.top_n = in.get<std::uint32_t>();
        const auto dynamic = in.get<std::uint8_t>();
        require(dynamic <= 1, ErrorCode::CorruptSnapshot, "bad dynamic flag");
        f.dynamic = dynamic == 1;
        // Version 1 has no gap record; such snapshots resume as if no batch
        // had been seen by the threshold update.
        if (version >= 2) {
            const auto has_gap = in.get<std::uint8_t>();
            require(has_gap <= 1, ErrorCode::CorruptSnapshot, "bad gap flag");
            const double gap = in.get<double>();
            if (has_gap == 1) {
                gaps[id] = gap;
            }
        }
        if (fusion) {
            require(*fusion == f, ErrorCode::CorruptSnapshot, "branches disagree on fusion settings");
            require(model.num_classes_ == static_cast<std::size_t>(bank.num_classes()), ErrorCode::CorruptSnapshot,
                    "branches disagree on class count");
        }
        fusion = f;
        model.num_classes_ = static_cast<std::size_t>(bank.num_classes());

        Expansion expansion = [&] {
            try {
                return Expansion::build(spec);
            } catch (const Error& e) {
                fail(ErrorCode::CorruptSnapshot, e.what());
            }
        }();
        model.units_[id].emplace(Unit{std::move(expansion), AnalyticClassifier(b, std::move(bank))});
    }
    require(in.remaining() == 0, ErrorCode::CorruptSnapshot, "trailing bytes after snapshot");
    if (model.has_branch(Branch::fused)) {
        const auto fused_in = model.expansion(Branch::fused).input_dim();
        if (model.has_branch(Branch::audio) && model.has_branch(Branch::video)) {
            require(fused_in == model.expansion(Branch::audio).input_dim() + model.expansion(Branch::video).input_dim(),
                    ErrorCode::CorruptSnapshot, "fused input dimension must equal audio + video");
        }
    }
    try {
        validate(*fusion, model.num_classes_);
    } catch (const Error& e) {
        fail(ErrorCode::CorruptSnapshot, e.what());
    }
    model.fusion_ = *fusion;
    model.thresholds_ = ThresholdState::fixed(fusion->theta_ini, fusion->lambda);
    for (auto b : kAllBranches) {
        if (model.has_branch(b)) {
            model.thresholds_.theta[index_of(b)] = theta[index_of(b)];
            model.thresholds_.previous_gap[index_of(b)] = gaps[index_of(b)];
        }
    }
    return model;
}

}// namespace mdaa
