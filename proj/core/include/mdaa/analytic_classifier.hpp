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
#pragma once

#include "mdaa/linalg.hpp"
#include "mdaa/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mdaa {

class ByteReader;
class ByteWriter;

/// Everything an analytic classifier knows: the regularized Gram matrix P
/// (φ×φ) and the feature/label cross-correlation Q (φ×C).
struct MemoryBank {
    Matrix p;
    Matrix q;
    double gamma = 1.0;

    Index dimension() const { return p.rows(); }
    Index num_classes() const { return q.cols(); }

    /// P = γI, Q = 0.
    static MemoryBank regularizer_only(Index dimension, Index num_classes, double gamma);
};

/// "MDAB" blob: magic, u16 version, u32 φ, u32 C, f64 γ, P and Q row-major
/// f64, little-endian.
std::vector<std::uint8_t> serialize(const MemoryBank& bank);
void serialize(const MemoryBank& bank, ByteWriter& out);
MemoryBank deserialize_bank(std::span<const std::uint8_t> bytes);
MemoryBank deserialize_bank(ByteReader& in);

inline constexpr std::uint16_t kMemoryBankVersion = 1;

/// Per-class source weights ω_c = N / (C · N_c); their sample mean is 1.
struct ClassWeights {
    std::vector<double> per_class;
    std::vector<std::size_t> counts;
    std::size_t total = 0;

    std::size_t num_classes() const { return per_class.size(); }
    double weight_of(std::int32_t label) const { return per_class.at(static_cast<std::size_t>(label)); }
};

/// Throws EmptyClass naming the first class without samples, InvalidSpec for
/// out-of-range labels.
ClassWeights compute_class_weights(std::span<const std::int32_t> labels, std::size_t num_classes);

/// One-hot encoding of integer labels.
Matrix one_hot(std::span<const std::int32_t> labels, std::size_t num_classes);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

/// A linear head W = P⁻¹Q over one branch's expanded features, kept in sync
/// with its memory bank lazily: updates mark it dirty and the next resolve()
/// refactorizes P.
///
/// Single writer. Concurrent const reads are safe once resolve() has run.
class AnalyticClassifier {
public:
    AnalyticClassifier(Branch id, MemoryBank bank);

    /// Class-weighted ridge fit on the source set:
    ///   P = Σ ω_k x_kᵀx_k + γI,  Q = Σ ω_k x_kᵀy_k.
    /// `labels` holds one row per feature row (one-hot for the source set).
    /// The source rows are not retained.
    static AnalyticClassifier init_source(Branch id, const Matrix& features, const Matrix& labels,
                                          std::span<const double> sample_weights, double gamma);

    /// Convenience overload deriving per-sample weights from class weights.
    static AnalyticClassifier init_source(Branch id, const Matrix& features, std::span<const std::int32_t> labels,
                                          const ClassWeights& weights, double gamma);

    /// P += XᵀX, Q += XᵀȲ with unit sample weight. An empty batch is a no-op
    /// that leaves the classifier clean.
    void adapt(const Matrix& features, const Matrix& pseudo_labels);

    /// Recomputes W if dirty. Throws NotPositiveDefinite if P has broken down.
    void resolve();

    /// W, resolving first if needed.
    const Matrix& weights();

    /// X·W. Uses the cached weights when clean; otherwise solves into a
    /// temporary without touching the cache.
    Matrix predict_logits(const Matrix& features) const;
    Matrix predict_probs(const Matrix& features) const;

    Branch id() const { return id_; }
    bool dirty() const { return dirty_; }
    const MemoryBank& bank() const { return bank_; }
    Index dimension() const { return bank_.dimension(); }
    Index num_classes() const { return bank_.num_classes(); }

    /// Number of factorizations performed so far.
    std::size_t factorizations() const { return factorizations_; }

private:
    Matrix solve_weights() const;

    Branch id_;
    MemoryBank bank_;
    Matrix weights_;
    bool dirty_ = true;
    std::size_t factorizations_ = 0;
};

}// namespace mdaa
