#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polibias/errors.hpp"
#include "polibias/lbfgs.hpp"
#include "polibias/sparse.hpp"

namespace polibias {

enum class Penalty { frobenius_squared, frobenius };

inline std::string_view penalty_name(Penalty p) {
    return p == Penalty::frobenius_squared ? "frobenius_squared" : "frobenius";
}

inline Penalty penalty_from_name(std::string_view name) {
    if (name == "frobenius_squared") return Penalty::frobenius_squared;
    if (name == "frobenius") return Penalty::frobenius;
    throw std::invalid_argument("unknown penalty '" + std::string(name) + "'");
}

/// Multinomial logistic regression parameters: W in R^{d x K} stored
/// row-major (row = feature, column = class), classes in lexicographic
/// order so column indices are reproducible.
struct Weights {
    std::size_t dim = 0;
    std::vector<std::string> classes;
    std::vector<double> values;    // dim * classes.size(), row-major

    std::size_t num_classes() const { return classes.size(); }
    double at(std::size_t feature, std::size_t cls) const {
        return values[feature * classes.size() + cls];
    }
};

struct TrainConfig {
    double gamma = 1.0;
    Penalty penalty = Penalty::frobenius_squared;
    double tol = 1e-6;         // gradient sup-norm stopping threshold
    int max_iter = 1000;
    std::uint64_t seed = 0;    // reserved; zero init needs no randomness
};

inline void validate(const TrainConfig& config) {
    if (config.gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    if (!(config.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (config.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

struct FitReport {
    int iterations = 0;
    double final_objective = 0.0;
    double final_grad_sup_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_history;
};

namespace detail {

// z_k = w_k^T x over the sparse entries of x.
inline void class_scores(const SparseVector& x, std::span<const double> w,
                         std::size_t num_classes, std::vector<double>& z) {
    z.assign(num_classes, 0.0);
    for (const auto& [feature, value] : x.entries) {
        const double* row = w.data() + feature * num_classes;
        for (std::size_t k = 0; k < num_classes; ++k) z[k] += row[k] * value;
    }
}

// Max-shifted softmax; returns log(sum(exp(z - m))) + m for the NLL.
inline double softmax_in_place(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (auto& v : z) v /= sum;
    return std::log(sum) + m;
}

inline double penalty_value(std::span<const double> w, double gamma, Penalty penalty) {
    if (gamma == 0.0) return 0.0;
    double sq = 0.0;
    for (const double v : w) sq += v * v;
    return penalty == Penalty::frobenius_squared ? gamma * sq : gamma * std::sqrt(sq);
}

inline void add_penalty_gradient(std::span<const double> w, double gamma, Penalty penalty,
                                 std::span<double> grad) {
    if (gamma == 0.0) return;
    if (penalty == Penalty::frobenius_squared) {
        for (std::size_t i = 0; i < w.size(); ++i) grad[i] += 2.0 * gamma * w[i];
    } else {
        double sq = 0.0;
        for (const double v : w) sq += v * v;
        const double norm = std::sqrt(sq);
        if (norm == 0.0) return;  // subgradient 0 at W = 0
        for (std::size_t i = 0; i < w.size(); ++i) grad[i] += gamma * w[i] / norm;
    }
}

// Penalized negative log-likelihood; fills the gradient when grad is
// non-null. Single fused pass so training does one softmax per document.
inline double objective_core(std::span<const double> w, const DocTermMatrix& data,
                             std::span<const std::size_t> y, std::size_t num_classes,
                             double gamma, Penalty penalty, std::vector<double>* grad) {
    if (grad) grad->assign(w.size(), 0.0);
    std::vector<double> z;
    double nll = 0.0;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const SparseVector& x = data.rows[i];
        class_scores(x, w, num_classes, z);
        const double true_score = z[y[i]];
        const double lse = softmax_in_place(z);  // z now holds probabilities
        nll += lse - true_score;
        if (grad) {
            z[y[i]] -= 1.0;  // p - onehot(y)
            for (const auto& [feature, value] : x.entries) {
                double* row = grad->data() + feature * num_classes;
                for (std::size_t k = 0; k < num_classes; ++k) row[k] += value * z[k];
            }
        }
    }
    if (grad) add_penalty_gradient(w, gamma, penalty, *grad);
    return nll + penalty_value(w, gamma, penalty);
}

inline std::vector<std::size_t> label_indices(const Weights& weights,
                                              std::span<const std::string> labels) {
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < weights.classes.size(); ++k) index[weights.classes[k]] = k;
    std::vector<std::size_t> y;
    y.reserve(labels.size());
    for (const auto& label : labels) {
        const auto it = index.find(label);
        if (it == index.end()) throw DataError("label '" + label + "' is not a model class");
        y.push_back(it->second);
    }
    return y;
}

inline void check_dims(const Weights& weights, const SparseVector& x) {
    if (x.dim != weights.dim)
        throw std::invalid_argument("input dimension " + std::to_string(x.dim) +
                                    " does not match model dimension " + std::to_string(weights.dim));
}

} // namespace detail

/// p(y = k | x, W) via max-shifted softmax of z_k = w_k^T x.
inline std::vector<double> softmax_probs(const SparseVector& x, const Weights& weights) {
    detail::check_dims(weights, x);
    if (weights.classes.empty()) throw std::invalid_argument("model has no classes");
    std::vector<double> z;
    detail::class_scores(x, weights.values, weights.num_classes(), z);
    detail::softmax_in_place(z);
    return z;
}

/// Sum of per-document negative log-likelihoods plus gamma * Omega(W),
/// Omega the squared (default) or plain Frobenius norm.
inline double objective(const Weights& weights, const DocTermMatrix& data,
                        std::span<const std::string> labels, double gamma, Penalty penalty) {
    if (data.rows.size() != labels.size())
        throw std::invalid_argument("data and label counts differ");
    if (data.dim != weights.dim && !data.rows.empty())
        throw std::invalid_argument("data dimension does not match model dimension");
    const auto y = detail::label_indices(weights, labels);
    return detail::objective_core(weights.values, data, y, weights.num_classes(), gamma, penalty,
                                  nullptr);
}

/// d x K gradient of the objective, row-major like Weights::values.
inline std::vector<double> gradient(const Weights& weights, const DocTermMatrix& data,
                                    std::span<const std::string> labels, double gamma,
                                    Penalty penalty) {
    if (data.rows.size() != labels.size())
        throw std::invalid_argument("data and label counts differ");
    if (data.dim != weights.dim && !data.rows.empty())
        throw std::invalid_argument("data dimension does not match model dimension");
    const auto y = detail::label_indices(weights, labels);
    std::vector<double> grad;
    detail::objective_core(weights.values, data, y, weights.num_classes(), gamma, penalty, &grad);
    return grad;
}

/// Trains from W = 0 with L-BFGS until the gradient sup-norm drops under
/// config.tol or max_iter is hit. Deterministic: identical inputs give
/// bit-identical weights.
inline std::pair<Weights, FitReport> train(const DocTermMatrix& data,
                                           std::span<const std::string> labels,
                                           const TrainConfig& config) {
    validate(config);
    if (data.rows.size() != labels.size())
        throw std::invalid_argument("data and label counts differ");
    if (data.rows.empty()) throw DataError("cannot train on an empty data set");

    Weights weights;
    weights.dim = data.dim;
    {
        std::set<std::string> classes(labels.begin(), labels.end());
        weights.classes.assign(classes.begin(), classes.end());
    }
    if (weights.classes.size() < 2)
        throw DataError("training needs at least 2 classes, got " +
                        std::to_string(weights.classes.size()));

    const auto y = detail::label_indices(weights, labels);
    const std::size_t num_classes = weights.num_classes();

    LbfgsOptions opt;
    opt.tol = config.tol;
    opt.max_iter = config.max_iter;
    auto result = lbfgs_minimize(
        [&](const std::vector<double>& w, std::vector<double>& grad) {
            const double f =
                detail::objective_core(w, data, y, num_classes, config.gamma, config.penalty, &grad);
            if (!std::isfinite(f)) throw NumericalError("objective became non-finite during training");
            return f;
        },
        std::vector<double>(data.dim * num_classes, 0.0), opt);

    weights.values = std::move(result.x);
    FitReport report;
    report.iterations = result.iterations;
    report.final_objective = result.objective;
    report.final_grad_sup_norm = result.grad_sup_norm;
    report.converged = result.converged;
    report.objective_history = std::move(result.objective_history);
    return {std::move(weights), std::move(report)};
}

/// Argmax class; ties go to the lowest class index, i.e. the
/// lexicographically first label.
inline std::pair<std::string, std::vector<double>> predict_proba(const SparseVector& x,
                                                                 const Weights& weights) {
    auto probs = softmax_probs(x, weights);
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k)
        if (probs[k] > probs[best]) best = k;
    return {weights.classes[best], std::move(probs)};
}

inline std::string predict(const SparseVector& x, const Weights& weights) {
    return predict_proba(x, weights).first;
}

} // namespace polibias
