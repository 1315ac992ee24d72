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
#include "mdaa/analytic_classifier.hpp"

#include "mdaa/binary_io.hpp"
#include "mdaa/error.hpp"

#include <cmath>
#include <string>

namespace mdaa {

MemoryBank MemoryBank::regularizer_only(Index dimension, Index num_classes, double gamma) {
    MemoryBank bank;
    bank.p = Matrix::Identity(dimension, dimension) * gamma;
    bank.q = Matrix::Zero(dimension, num_classes);
    bank.gamma = gamma;
    return bank;
}

void serialize(const MemoryBank& bank, ByteWriter& out) {
    out.magic("MDAB");
    out.put<std::uint16_t>(kMemoryBankVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(bank.dimension()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(bank.num_classes()));
    out.put<double>(bank.gamma);
    for (Index i = 0; i < bank.p.rows(); ++i) {
        for (Index j = 0; j < bank.p.cols(); ++j) {
            out.put<double>(bank.p(i, j));
        }
    }
    for (Index i = 0; i < bank.q.rows(); ++i) {
        for (Index j = 0; j < bank.q.cols(); ++j) {
            out.put<double>(bank.q(i, j));
        }
    }
}

std::vector<std::uint8_t> serialize(const MemoryBank& bank) {
    ByteWriter out;
    serialize(bank, out);
    return out.take();
}

MemoryBank deserialize_bank(ByteReader& in) {
    in.expect_magic("MDAB");
    const auto version = in.get<std::uint16_t>();
    if (version != kMemoryBankVersion) {
        fail(in.code(), "unsupported memory bank version " + std::to_string(version));
    }
    const auto phi = in.get<std::uint32_t>();
    const auto classes = in.get<std::uint32_t>();
    MemoryBank bank;
    bank.gamma = in.get<double>();
    const std::size_t values = static_cast<std::size_t>(phi) * phi + static_cast<std::size_t>(phi) * classes;
    in.need(values * sizeof(double), "memory bank matrices");
    bank.p.resize(phi, phi);
    bank.q.resize(phi, classes);
    for (Index i = 0; i < bank.p.rows(); ++i) {
        for (Index j = 0; j < bank.p.cols(); ++j) {
            bank.p(i, j) = in.get<double>();
        }
    }
    for (Index i = 0; i < bank.q.rows(); ++i) {
        for (Index j = 0; j < bank.q.cols(); ++j) {
            bank.q(i, j) = in.get<double>();
        }
    }
    return bank;
}

MemoryBank deserialize_bank(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, ErrorCode::CorruptSnapshot);
    MemoryBank bank = deserialize_bank(in);
    if (in.remaining() != 0) {
        fail(ErrorCode::CorruptSnapshot, "trailing bytes after memory bank");
    }
    return bank;
}

ClassWeights compute_class_weights(std::span<const std::int32_t> labels, std::size_t num_classes) {
    require(num_classes > 0, ErrorCode::InvalidSpec, "class count must be positive");
    ClassWeights w;
    w.counts.assign(num_classes, 0);
    for (auto label : labels) {
        require(label >= 0 && static_cast<std::size_t>(label) < num_classes, ErrorCode::InvalidSpec,
                "label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
        ++w.counts[static_cast<std::size_t>(label)];
    }
    w.total = labels.size();
    w.per_class.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (w.counts[c] == 0) {
            fail(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no source samples");
        }
        w.per_class[c] = static_cast<double>(w.total)
                         / (static_cast<double>(num_classes) * static_cast<double>(w.counts[c]));
    }
    return w;
}

Matrix one_hot(std::span<const std::int32_t> labels, std::size_t num_classes) {
    Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), static_cast<Index>(num_classes));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        require(labels[k] >= 0 && static_cast<std::size_t>(labels[k]) < num_classes, ErrorCode::InvalidSpec,
                "label " + std::to_string(labels[k]) + " out of range");
        y(static_cast<Index>(k), labels[k]) = 1.0;
    }
    return y;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix probs(logits.rows(), logits.cols());
    for (Index r = 0; r < logits.rows(); ++r) {
        const double peak = logits.row(r).maxCoeff();
        double total = 0.0;
        for (Index c = 0; c < logits.cols(); ++c) {
            probs(r, c) = std::exp(logits(r, c) - peak);
            total += probs(r, c);
        }
        probs.row(r) /= total;
    }
    return probs;
}

AnalyticClassifier::AnalyticClassifier(Branch id, MemoryBank bank) : id_(id), bank_(std::move(bank)) {
    require(bank_.p.rows() == bank_.p.cols() && bank_.q.rows() == bank_.p.rows(), ErrorCode::DimensionMismatch,
            "memory bank P and Q shapes disagree");
    require(bank_.gamma >= 0.0, ErrorCode::InvalidSpec, "gamma must not be negative");
}

AnalyticClassifier AnalyticClassifier::init_source(Branch id, const Matrix& features, const Matrix& labels,
                                                   std::span<const double> sample_weights, double gamma) {
    require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::InvalidSpec, "gamma must be non-negative");
    require(features.rows() == labels.rows(), ErrorCode::DimensionMismatch,
            "init_source: " + std::to_string(features.rows()) + " feature rows vs " + std::to_string(labels.rows())
                + " label rows");
    require(static_cast<Index>(sample_weights.size()) == features.rows(), ErrorCode::DimensionMismatch,
            "init_source: one weight per sample required");
    require(features.allFinite() && labels.allFinite(), ErrorCode::NonFiniteInput, "init_source input not finite");

    MemoryBank bank = MemoryBank::regularizer_only(features.cols(), labels.cols(), gamma);
    if (features.rows() > 0) {
        Matrix weighted = features;
        for (Index k = 0; k < weighted.rows(); ++k) {
            weighted.row(k) *= sample_weights[static_cast<std::size_t>(k)];
        }
        Matrix gram(features.cols(), features.cols());
        gram.triangularView<Eigen::Lower>() = features.transpose() * weighted;
        bank.p.triangularView<Eigen::Lower>() += gram;
        mirror_lower(bank.p);
        bank.q.noalias() += weighted.transpose() * labels;
    }
    return AnalyticClassifier(id, std::move(bank));
}

AnalyticClassifier AnalyticClassifier::init_source(Branch id, const Matrix& features,
                                                   std::span<const std::int32_t> labels, const ClassWeights& weights,
                                                   double gamma) {
    std::vector<double> sample_weights(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
        sample_weights[k] = weights.weight_of(labels[k]);
    }
    return init_source(id, features, one_hot(labels, weights.num_classes()), sample_weights, gamma);
}

void AnalyticClassifier::adapt(const Matrix& features, const Matrix& pseudo_labels) {
    require(features.rows() == pseudo_labels.rows(), ErrorCode::DimensionMismatch,
            "adapt: feature and pseudo-label row counts differ");
    require(features.cols() == dimension() && pseudo_labels.cols() == num_classes(), ErrorCode::DimensionMismatch,
            "adapt: batch shape does not match the memory bank");
    if (features.rows() == 0) {
        return;
    }
    rank_k_update_in_place(bank_.p, features);
    cross_update_in_place(bank_.q, features, pseudo_labels);
    dirty_ = true;
}

Matrix AnalyticClassifier::solve_weights() const { return spd_solve(spd_factorize(bank_.p), bank_.q); }

void AnalyticClassifier::resolve() {
    if (!dirty_) {
        return;
    }
    weights_ = solve_weights();
    ++factorizations_;
    dirty_ = false;
}

const Matrix& AnalyticClassifier::weights() {
    resolve();
    return weights_;
}

Matrix AnalyticClassifier::predict_logits(const Matrix& features) const {
    require(features.cols() == dimension(), ErrorCode::DimensionMismatch,
            "predict: features have " + std::to_string(features.cols()) + " columns, classifier expects "
                + std::to_string(dimension()));
    if (dirty_) {
        return features * solve_weights();
    }
    return features * weights_;
}

Matrix AnalyticClassifier::predict_probs(const Matrix& features) const {
    return softmax_rows(predict_logits(features));
}

}// namespace mdaa
