#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polibias/corpus.hpp"
#include "polibias/errors.hpp"
#include "polibias/pipeline.hpp"
#include "polibias/random.hpp"

namespace polibias {

/// K x K counts, rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::int64_t>> counts;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts)
            for (const auto c : row) t += c;
        return t;
    }
};

inline ConfusionMatrix confusion(std::span<const std::string> true_labels,
                                 std::span<const std::string> predicted_labels,
                                 std::vector<std::string> classes) {
    if (true_labels.size() != predicted_labels.size())
        throw std::invalid_argument("true and predicted label sequences differ in length");
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;

    ConfusionMatrix cm;
    cm.classes = std::move(classes);
    cm.counts.assign(cm.classes.size(), std::vector<std::int64_t>(cm.classes.size(), 0));
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const auto ti = index.find(true_labels[i]);
        if (ti == index.end()) throw DataError("label '" + true_labels[i] + "' is not a known class");
        const auto pi = index.find(predicted_labels[i]);
        if (pi == index.end())
            throw DataError("label '" + predicted_labels[i] + "' is not a known class");
        ++cm.counts[ti->second][pi->second];
    }
    return cm;
}

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    bool degenerate = false;  // some metric hit the 0/0 -> 0 convention
};

/// Per-class precision/recall/f1 plus the support-weighted "avg / total"
/// row, macro averages and overall accuracy.
struct ClassReport {
    std::vector<ClassMetrics> per_class;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::int64_t total = 0;
};

inline ClassReport class_report(const ConfusionMatrix& cm) {
    const std::size_t k = cm.classes.size();
    if (k == 0) throw DataError("empty confusion matrix");
    const std::int64_t total = cm.total();
    if (total == 0) throw DataError("confusion matrix has no observations");

    ClassReport report;
    report.total = total;
    std::int64_t trace = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t tp = cm.counts[c][c];
        std::int64_t true_count = 0, predicted_count = 0;
        for (std::size_t j = 0; j < k; ++j) {
            true_count += cm.counts[c][j];
            predicted_count += cm.counts[j][c];
        }
        trace += tp;

        ClassMetrics m;
        m.label = cm.classes[c];
        m.support = true_count;
        if (predicted_count > 0) {
            m.precision = static_cast<double>(tp) / static_cast<double>(predicted_count);
        } else {
            m.degenerate = true;
        }
        if (true_count > 0) {
            m.recall = static_cast<double>(tp) / static_cast<double>(true_count);
        } else {
            m.degenerate = true;
        }
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.degenerate = true;
        }

        const double w = static_cast<double>(m.support);
        report.weighted_precision += w * m.precision;
        report.weighted_recall += w * m.recall;
        report.weighted_f1 += w * m.f1;
        report.macro_precision += m.precision;
        report.macro_recall += m.recall;
        report.macro_f1 += m.f1;
        report.per_class.push_back(std::move(m));
    }
    const auto dtotal = static_cast<double>(total);
    report.weighted_precision /= dtotal;
    report.weighted_recall /= dtotal;
    report.weighted_f1 /= dtotal;
    report.macro_precision /= static_cast<double>(k);
    report.macro_recall /= static_cast<double>(k);
    report.macro_f1 /= static_cast<double>(k);
    report.accuracy = static_cast<double>(trace) / dtotal;
    return report;
}

/// Seeded stratified k-fold assignment. Each class's indices are dealt
/// round-robin after a shuffle, so per-class fold sizes differ by at most
/// one; the dealing start rotates with the class sizes to balance totals.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                           std::span<const std::string> labels,
                                                           std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (labels.size() != n) throw std::invalid_argument("label count does not match n");
    if (n == 0) throw DataError("cannot fold an empty data set");

    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < n; ++i) by_label[labels[i]].push_back(i);
    for (const auto& [label, indices] : by_label)
        if (indices.size() < static_cast<std::size_t>(k))
            throw DataError("class '" + label + "' has " + std::to_string(indices.size()) +
                            " members, fewer than k=" + std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t start = 0;
    for (auto& [label, indices] : by_label) {
        deterministic_shuffle(indices, rng);
        for (std::size_t i = 0; i < indices.size(); ++i)
            folds[(start + i) % static_cast<std::size_t>(k)].push_back(indices[i]);
        start = (start + indices.size()) % static_cast<std::size_t>(k);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

/// Hyperparameter grid: the cartesian product of regularization strengths
/// and vectorizer settings searched by cross-validation.
struct HyperGrid {
    std::vector<double> gamma;
    std::vector<int> ngram_max;
    std::vector<bool> use_tfidf;
    std::vector<int> min_df;
    std::vector<double> max_df;
};

/// Decade-spaced gamma 1e-4..1e4 plus the vectorizer sweeps.
inline HyperGrid default_hyper_grid() {
    HyperGrid grid;
    for (int e = -4; e <= 4; ++e) grid.gamma.push_back(std::pow(10.0, e));
    grid.ngram_max = {1, 2, 3};
    grid.use_tfidf = {false, true};
    grid.min_df = {1, 2, 5};
    grid.max_df = {0.5, 0.9, 1.0};
    return grid;
}

inline void validate(const HyperGrid& grid) {
    if (grid.gamma.empty() || grid.ngram_max.empty() || grid.use_tfidf.empty() ||
        grid.min_df.empty() || grid.max_df.empty())
        throw std::invalid_argument("hyperparameter grid has an empty axis");
    for (const double g : grid.gamma)
        if (g < 0.0) throw std::invalid_argument("gamma must be >= 0");
    for (const int n : grid.ngram_max)
        if (n < 1 || n > 3) throw std::invalid_argument("ngram_max must be 1, 2 or 3");
    for (const int m : grid.min_df)
        if (m < 1) throw std::invalid_argument("min_df must be >= 1");
    for (const double m : grid.max_df)
        if (!(m > 0.0) || m > 1.0) throw std::invalid_argument("max_df must be in (0, 1]");
}

struct GridPoint {
    BowConfig bow;
    double gamma = 1.0;
};

/// Canonical enumeration order: gamma ascending, then ngram_max, tfidf
/// (false first), min_df, max_df, each in the order given by the grid.
inline std::vector<GridPoint> enumerate_grid(const HyperGrid& grid) {
    validate(grid);
    std::vector<GridPoint> points;
    for (const double gamma : grid.gamma)
        for (const int ngram : grid.ngram_max)
            for (const bool tfidf : grid.use_tfidf)
                for (const int min_df : grid.min_df)
                    for (const double max_df : grid.max_df) {
                        GridPoint p;
                        p.gamma = gamma;
                        p.bow.ngram_max = ngram;
                        p.bow.use_tfidf = tfidf;
                        p.bow.min_df = min_df;
                        p.bow.max_df = max_df;
                        points.push_back(p);
                    }
    return points;
}

struct GridPointResult {
    GridPoint point;
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
};

inline constexpr const char* kGridTieBreakRule =
    "ties by larger gamma, smaller ngram_max, tfidf=false first, larger min_df, smaller max_df";

/// Strictly-better comparison for grid selection: higher mean accuracy
/// wins; exact ties fall to the simpler model per kGridTieBreakRule.
inline bool grid_point_better(double mean_a, const GridPoint& a, double mean_b,
                              const GridPoint& b) {
    if (mean_a != mean_b) return mean_a > mean_b;
    if (a.gamma != b.gamma) return a.gamma > b.gamma;
    if (a.bow.ngram_max != b.bow.ngram_max) return a.bow.ngram_max < b.bow.ngram_max;
    if (a.bow.use_tfidf != b.bow.use_tfidf) return !a.bow.use_tfidf;
    if (a.bow.min_df != b.bow.min_df) return a.bow.min_df > b.bow.min_df;
    if (a.bow.max_df != b.bow.max_df) return a.bow.max_df < b.bow.max_df;
    return false;
}

struct CvResult {
    std::vector<GridPointResult> results;  // canonical grid order
    std::size_t best_index = 0;
    std::string tie_break = kGridTieBreakRule;

    const GridPoint& best() const { return results[best_index].point; }
    double best_mean_accuracy() const { return results[best_index].mean_accuracy; }
};

namespace detail {

inline LabeledCorpus subset(const LabeledCorpus& corpus, std::span<const std::size_t> indices) {
    LabeledCorpus out;
    out.label_kind = corpus.label_kind;
    out.units.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (const auto i : indices) {
        out.units.push_back(corpus.units[i]);
        out.labels.push_back(corpus.labels[i]);
    }
    return out;
}

inline double fold_accuracy(const LabeledCorpus& train_part, const LabeledCorpus& test_part,
                            const GridPoint& point, const TrainConfig& base) {
    TrainConfig config = base;
    config.gamma = point.gamma;
    auto [classifier, report] = fit_classifier(train_part, point.bow, config);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_part.size(); ++i) {
        const auto prediction = predict_text(classifier, test_part.units[i].text).first;
        if (prediction == test_part.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_part.size());
}

} // namespace detail

/// Grid search with stratified k-fold cross-validation over the training
/// corpus only. For every grid point the whole pipeline (vocabulary +
/// model) is refit per fold; the selection metric is accuracy.
inline CvResult grid_search(const LabeledCorpus& train_corpus, const HyperGrid& grid,
                            const TrainConfig& base_config, int k, std::uint64_t seed) {
    if (train_corpus.empty()) throw DataError("cannot run grid search on an empty corpus");
    const auto points = enumerate_grid(grid);
    const auto folds = kfold_indices(train_corpus.size(), k, train_corpus.labels, seed);

    // Hold-out/complement index sets, reused across grid points.
    std::vector<LabeledCorpus> fold_train, fold_test;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> rest;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
        std::sort(rest.begin(), rest.end());
        fold_train.push_back(detail::subset(train_corpus, rest));
        fold_test.push_back(detail::subset(train_corpus, folds[f]));
    }

    CvResult cv;
    cv.results.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        GridPointResult result;
        result.point = points[p];
        double sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const double acc =
                detail::fold_accuracy(fold_train[f], fold_test[f], points[p], base_config);
            result.fold_accuracy.push_back(acc);
            sum += acc;
        }
        result.mean_accuracy = sum / static_cast<double>(folds.size());
        cv.results.push_back(std::move(result));
        if (p > 0 && grid_point_better(cv.results[p].mean_accuracy, cv.results[p].point,
                                       cv.results[cv.best_index].mean_accuracy,
                                       cv.results[cv.best_index].point))
            cv.best_index = p;
    }
    return cv;
}

/// Predicts every unit of the evaluation corpus and reduces to a report
/// plus confusion matrix over the model's classes.
inline std::pair<ClassReport, ConfusionMatrix> evaluate(const TextClassifier& classifier,
                                                        const LabeledCorpus& eval_corpus) {
    if (eval_corpus.empty()) throw DataError("cannot evaluate on an empty corpus");
    std::vector<std::string> predictions;
    predictions.reserve(eval_corpus.size());
    for (const auto& unit : eval_corpus.units)
        predictions.push_back(predict_text(classifier, unit.text).first);
    auto cm = confusion(eval_corpus.labels, predictions, classifier.weights.classes);
    auto report = class_report(cm);
    return {std::move(report), std::move(cm)};
}

} // namespace polibias
