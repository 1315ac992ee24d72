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
#include "mdaa/oracle.hpp"

#include "mdaa/analytic_classifier.hpp"
#include "mdaa/dlfm.hpp"
#include "mdaa/error.hpp"
#include "mdaa/expansion.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mdaa {

Matrix gaussian_solve(Matrix a, Matrix b) {
    const Index n = a.rows();
    require(a.cols() == n && b.rows() == n, ErrorCode::DimensionMismatch, "gaussian_solve shape mismatch");
    double scale = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
        }
    }
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
    for (Index col = 0; col < n; ++col) {
        Index pivot = col;
        for (Index r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (!(std::abs(a(pivot, col)) > tol)) {
            fail(ErrorCode::NotPositiveDefinite, "joint system is singular at column " + std::to_string(col));
        }
        if (pivot != col) {
            for (Index j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            for (Index j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(pivot, j));
        }
        for (Index r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) {
                continue;
            }
            for (Index j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (Index j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
        }
    }
    Matrix x(n, b.cols());
    for (Index r = n - 1; r >= 0; --r) {
        for (Index j = 0; j < b.cols(); ++j) {
            double s = b(r, j);
            for (Index k = r + 1; k < n; ++k) s -= a(r, k) * x(k, j);
            x(r, j) = s / a(r, r);
        }
    }
    return x;
}

Matrix joint_ridge_solution(const Matrix& source_features, const Matrix& source_labels,
                            std::span<const double> source_weights, const Matrix& target_features,
                            const Matrix& target_labels, double gamma) {
    const Index phi = source_features.cols();
    const Index classes = source_labels.cols();
    require(target_features.cols() == phi && target_labels.cols() == classes, ErrorCode::DimensionMismatch,
            "joint solve shape mismatch");
    Matrix a = Matrix::Zero(phi, phi);
    Matrix b = Matrix::Zero(phi, classes);
    for (Index i = 0; i < phi; ++i) {
        a(i, i) = gamma;
    }
    auto accumulate = [&](const Matrix& x, const Matrix& y, auto weight_of) {
        for (Index k = 0; k < x.rows(); ++k) {
            const double w = weight_of(k);
            for (Index i = 0; i < phi; ++i) {
                const double wx = w * x(k, i);
                for (Index j = 0; j < phi; ++j) a(i, j) += wx * x(k, j);
                for (Index j = 0; j < classes; ++j) b(i, j) += wx * y(k, j);
            }
        }
    };
    accumulate(source_features, source_labels, [&](Index k) { return source_weights[static_cast<std::size_t>(k)]; });
    accumulate(target_features, target_labels, [](Index) { return 1.0; });
    return gaussian_solve(std::move(a), std::move(b));
}

namespace {

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

Matrix append_rows(const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
    if (top.rows() > 0) out.topRows(top.rows()) = top;
    if (bottom.rows() > 0) out.bottomRows(bottom.rows()) = bottom;
    return out;
}

OracleCase run_case(const OracleConfig& config, const std::string& kind, std::uint32_t phi, std::uint32_t classes,
                    std::mt19937_64& rng) {
    OracleCase c;
    c.kind = kind;
    c.phi = phi;
    c.num_classes = classes;

    ExpansionSpec spec{config.input_dim, phi, rng(), Nonlinearity::relu, 1.0 / std::sqrt(config.input_dim)};
    Expansion expansion = Expansion::build(spec);
    if (kind == "duplicate-columns") {
        Matrix projection = expansion.projection();
        for (Index j = 1; j < projection.cols(); j += 2) {
            projection.col(j) = projection.col(j - 1);
        }
        expansion = Expansion::with_projection(spec, std::move(projection));
    }

    // Imbalanced source: the first half of the classes get `imbalance_ratio`
    // times the samples of the rest.
    std::vector<std::int32_t> labels;
    const std::uint32_t majority = (classes + 1) / 2;
    const std::uint32_t per_minority =
        std::max<std::uint32_t>(1, config.source_samples / (config.imbalance_ratio * majority + classes - majority));
    for (std::uint32_t k = 0; k < classes; ++k) {
        labels.insert(labels.end(), k < majority ? per_minority * config.imbalance_ratio : per_minority,
                      static_cast<std::int32_t>(k));
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const Matrix source_x = expansion.expand(random_matrix(rng, static_cast<Index>(labels.size()), config.input_dim));
    const ClassWeights weights = compute_class_weights(labels, classes);
    std::vector<double> sample_weights;
    for (auto l : labels) sample_weights.push_back(weights.weight_of(l));
    const Matrix source_y = one_hot(labels, classes);

    std::uniform_int_distribution<std::uint32_t> batch_count(1, config.max_batches);
    std::uniform_int_distribution<std::uint32_t> batch_size(1, config.max_batch_size);
    std::uniform_int_distribution<std::uint32_t> top_n(1, classes);
    c.batches = batch_count(rng);

    Matrix all_x(0, phi);
    Matrix all_y(0, classes);
    try {
        AnalyticClassifier ac = AnalyticClassifier::init_source(Branch::fused, source_x, source_y, sample_weights,
                                                                config.gamma);
        Matrix raw_repeat = random_matrix(rng, 1, config.input_dim);
        for (std::size_t t = 0; t < c.batches; ++t) {
            const Index rows = batch_size(rng);
            Matrix raw = random_matrix(rng, rows, config.input_dim);
            if (kind == "repeated-samples") {
                for (Index r = 0; r < rows; ++r) {
                    raw.row(r) = raw_repeat + 1e-9 * raw.row(r);
                }
            }
            const Matrix x = expansion.expand(raw);
            Matrix y(rows, classes);
            for (Index r = 0; r < rows; ++r) {
                const RowVector scores = random_matrix(rng, 1, classes);
                std::vector<double> row(scores.data(), scores.data() + classes);
                y.row(r) = build_soft_label(row, top_n(rng), classes).densify(classes);
            }
            ac.adapt(x, y);
            // Resolve mid-stream now and then so stale caches would show up.
            if (t % 7 == 3) {
                ac.resolve();
            }
            all_x = append_rows(all_x, x);
            all_y = append_rows(all_y, y);
        }
        c.target_samples = static_cast<std::size_t>(all_x.rows());
        const Matrix recursive = ac.weights();
        const Matrix joint = joint_ridge_solution(source_x, source_y, sample_weights, all_x, all_y, config.gamma);
        c.rel_error = relative_frobenius(recursive, joint, 1e-300);
        c.passed = c.rel_error <= config.tolerance;
        if (!c.passed) {
            c.diagnosis = "relative error above tolerance";
        }
    } catch (const Error& e) {
        c.target_samples = static_cast<std::size_t>(all_x.rows());
        c.rel_error = std::numeric_limits<double>::infinity();
        c.passed = false;
        c.diagnosis = e.what();
    }
    return c;
}

}// namespace

OracleReport run_oracle(const OracleConfig& config) {
    for (auto phi : config.phis) {
        require(phi >= 1 && phi <= 256, ErrorCode::InvalidConfig,
                "oracle phi must lie in [1, 256], got " + std::to_string(phi));
    }
    for (auto c : config.classes) {
        require(c >= 1, ErrorCode::InvalidConfig, "oracle class counts must be positive");
    }
    require(!config.phis.empty() && !config.classes.empty(), ErrorCode::InvalidConfig, "oracle needs sizes");
    require(config.max_batches >= 1 && config.max_batch_size >= 1 && config.input_dim >= 1, ErrorCode::InvalidConfig,
            "oracle batch bounds must be positive");
    require(config.gamma >= 0.0, ErrorCode::InvalidConfig, "oracle gamma must be non-negative");

    OracleReport report;
    report.tolerance = config.tolerance;
    std::mt19937_64 rng(config.seed);
    for (std::uint32_t i = 0; i < config.cases; ++i) {
        const auto phi = config.phis[(i / config.classes.size()) % config.phis.size()];
        const auto classes = config.classes[i % config.classes.size()];
        report.cases.push_back(run_case(config, "random", phi, classes, rng));
    }
    if (config.adversarial) {
        for (auto phi : config.phis) {
            for (auto classes : config.classes) {
                report.cases.push_back(run_case(config, "duplicate-columns", phi, classes, rng));
                report.cases.push_back(run_case(config, "repeated-samples", phi, classes, rng));
            }
        }
    }
    report.passed = !report.cases.empty();
    for (const auto& c : report.cases) {
        report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
        report.passed = report.passed && c.passed;
    }
    return report;
}

std::string oracle_report_json(const OracleReport& report) {
    nlohmann::json o;
    o["passed"] = report.passed;
    o["tolerance"] = report.tolerance;
    o["max_rel_error"] = std::isfinite(report.max_rel_error) ? nlohmann::json(report.max_rel_error) : nlohmann::json();
    o["cases"] = nlohmann::json::array();
    for (const auto& c : report.cases) {
        nlohmann::json j;
        j["kind"] = c.kind;
        j["phi"] = c.phi;
        j["num_classes"] = c.num_classes;
        j["batches"] = c.batches;
        j["target_samples"] = c.target_samples;
        j["rel_error"] = std::isfinite(c.rel_error) ? nlohmann::json(c.rel_error) : nlohmann::json();
        j["passed"] = c.passed;
        if (!c.diagnosis.empty()) j["diagnosis"] = c.diagnosis;
        o["cases"].push_back(std::move(j));
    }
    return o.dump(2);
}

}// namespace mdaa
