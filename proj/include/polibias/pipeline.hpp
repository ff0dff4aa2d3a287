#pragma once

#include <string>
#include <utility>
#include <vector>

#include "polibias/corpus.hpp"
#include "polibias/model.hpp"
#include "polibias/sparse.hpp"
#include "polibias/vectorizer.hpp"

namespace polibias {

/// Fitted vectorizer + classifier, the unit that gets persisted and that
/// evaluation and prediction run through.
struct TextClassifier {
    Vocabulary vocab;
    Weights weights;
};

inline DocTermMatrix transform_corpus(const LabeledCorpus& corpus, const Vocabulary& vocab) {
    DocTermMatrix matrix;
    matrix.dim = vocab.dim();
    matrix.ids.reserve(corpus.size());
    matrix.rows.reserve(corpus.size());
    for (const auto& unit : corpus.units) {
        matrix.ids.push_back(unit.id);
        matrix.rows.push_back(transform(unit.text, vocab));
    }
    return matrix;
}

inline std::vector<std::string> corpus_texts(const LabeledCorpus& corpus) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& unit : corpus.units) texts.push_back(unit.text);
    return texts;
}

/// Fits the vocabulary on the corpus texts, vectorizes, and trains the
/// classifier on the corpus labels.
inline std::pair<TextClassifier, FitReport> fit_classifier(const LabeledCorpus& corpus,
                                                           const BowConfig& bow,
                                                           const TrainConfig& train_config) {
    TextClassifier classifier;
    const auto texts = corpus_texts(corpus);
    classifier.vocab = fit_vocabulary(texts, bow);
    const auto matrix = transform_corpus(corpus, classifier.vocab);
    auto [weights, report] = train(matrix, corpus.labels, train_config);
    classifier.weights = std::move(weights);
    return {std::move(classifier), std::move(report)};
}

inline std::pair<std::string, std::vector<double>> predict_text(const TextClassifier& classifier,
                                                                std::string_view text) {
    return predict_proba(transform(text, classifier.vocab), classifier.weights);
}

} // namespace polibias
