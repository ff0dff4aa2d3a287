#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "polibias/errors.hpp"
#include "polibias/sparse.hpp"
#include "polibias/tokenize.hpp"

namespace polibias {

/// Bag-of-words settings. min_df is an absolute document count, max_df a
/// fraction of documents; a term survives pruning when
/// min_df <= df and df/N <= max_df.
struct BowConfig {
    int ngram_max = 1;      // 1..3
    bool use_tfidf = false;
    int min_df = 1;
    double max_df = 1.0;    // (0, 1]
    bool lowercase = true;
};

inline void validate(const BowConfig& config) {
    if (config.ngram_max < 1 || config.ngram_max > 3)
        throw std::invalid_argument("ngram_max must be 1, 2 or 3");
    if (config.min_df < 1)
        throw std::invalid_argument("min_df must be >= 1");
    if (!(config.max_df > 0.0) || config.max_df > 1.0)
        throw std::invalid_argument("max_df must be in (0, 1]");
}

/// All contiguous n-grams for n = 1..ngram_max joined with single spaces:
/// first every unigram, then every bigram, and so on.
inline std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int ngram_max) {
    if (ngram_max < 1 || ngram_max > 3)
        throw std::invalid_argument("ngram_max must be 1, 2 or 3");
    std::vector<std::string> terms;
    terms.reserve(tokens.size() * static_cast<std::size_t>(ngram_max));
    for (int n = 1; n <= ngram_max; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
            std::string term = tokens[i];
            for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j) {
                term += ' ';
                term += tokens[i + j];
            }
            terms.push_back(std::move(term));
        }
    }
    return terms;
}

/// Fitted term dictionary. Term index = position in `terms`, which is kept
/// in lexicographic (byte) order so column ids are reproducible.
struct Vocabulary {
    std::vector<std::string> terms;
    std::vector<std::int64_t> df;
    std::vector<double> idf;    // filled iff config.use_tfidf
    BowConfig config;

    std::size_t dim() const { return terms.size(); }

    const std::unordered_map<std::string, std::size_t>& index() const {
        if (index_.size() != terms.size()) {
            index_.clear();
            index_.reserve(terms.size());
            for (std::size_t i = 0; i < terms.size(); ++i) index_.emplace(terms[i], i);
        }
        return index_;
    }

private:
    mutable std::unordered_map<std::string, std::size_t> index_;
};

/// Builds the vocabulary over `texts`: document frequencies of all
/// n-grams, df pruning, and smoothed idf = ln((1+N)/(1+df)) + 1 when
/// tf-idf is enabled.
inline Vocabulary fit_vocabulary(std::span<const std::string> texts, const BowConfig& config) {
    validate(config);
    if (texts.empty()) throw DataError("cannot fit vocabulary on an empty corpus");

    std::map<std::string, std::int64_t> df_counts;  // sorted => lexicographic term order
    for (const auto& text : texts) {
        const auto tokens = tokenize(text, config.lowercase);
        std::set<std::string> seen;
        for (auto& term : extract_ngrams(tokens, config.ngram_max)) seen.insert(std::move(term));
        for (const auto& term : seen) ++df_counts[term];
    }

    const auto n_docs = static_cast<double>(texts.size());
    Vocabulary vocab;
    vocab.config = config;
    for (auto& [term, df] : df_counts) {
        if (df < config.min_df) continue;
        if (static_cast<double>(df) / n_docs > config.max_df) continue;
        vocab.terms.push_back(term);
        vocab.df.push_back(df);
    }
    if (vocab.terms.empty())
        throw DataError("empty vocabulary: all terms pruned by the df cutoffs");

    if (config.use_tfidf) {
        vocab.idf.reserve(vocab.terms.size());
        for (const auto df : vocab.df)
            vocab.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df))) + 1.0);
    }
    return vocab;
}

namespace detail {

inline SparseVector count_terms(std::string_view text, const Vocabulary& vocab) {
    const auto tokens = tokenize(text, vocab.config.lowercase);
    const auto& index = vocab.index();
    std::map<std::size_t, double> counts;  // sorted indices
    for (const auto& term : extract_ngrams(tokens, vocab.config.ngram_max)) {
        const auto it = index.find(term);
        if (it != index.end()) counts[it->second] += 1.0;
    }
    SparseVector x;
    x.dim = vocab.dim();
    x.entries.assign(counts.begin(), counts.end());
    return x;
}

} // namespace detail

/// Text -> sparse vector over the fitted vocabulary. Out-of-vocabulary
/// terms are ignored; an all-OOV text maps to the zero vector. In tf-idf
/// mode counts are idf-weighted and the result is L2-normalized.
inline SparseVector transform(std::string_view text, const Vocabulary& vocab) {
    SparseVector x = detail::count_terms(text, vocab);
    if (vocab.config.use_tfidf) {
        for (auto& [idx, value] : x.entries) value *= vocab.idf[idx];
        l2_normalize(x);
    }
    return x;
}

/// Raw occurrence counts regardless of the tf-idf setting. Used where an
/// unweighted representation is requested (word-label correlations).
inline SparseVector transform_counts(std::string_view text, const Vocabulary& vocab) {
    return detail::count_terms(text, vocab);
}

} // namespace polibias
