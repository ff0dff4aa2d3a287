#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "polibias/corpus.hpp"
#include "polibias/errors.hpp"
#include "polibias/sparse.hpp"
#include "polibias/tokenize.hpp"
#include "polibias/vectorizer.hpp"

namespace polibias {

/// Word -> polarity in [-1, 1], keys lowercased with the tokenizer's
/// case mapping so they line up with vocabulary terms.
struct SentimentLexicon {
    std::unordered_map<std::string, double> polarity;
    std::string source_files;

    std::size_t size() const { return polarity.size(); }
};

namespace detail {

inline void read_lexicon_file(const std::string& path,
                              std::unordered_map<std::string, double>& sums) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(line_no);

        // Word|POSTAG <TAB> polarity [<TAB> inflection,inflection,...]
        const auto tab1 = line.find('\t');
        if (tab1 == std::string::npos) throw DataError(where + ": expected tab-separated fields");
        const auto tab2 = line.find('\t', tab1 + 1);
        const std::string head = line.substr(0, tab1);
        const std::string polarity_field = tab2 == std::string::npos
                                               ? line.substr(tab1 + 1)
                                               : line.substr(tab1 + 1, tab2 - tab1 - 1);

        const auto pipe = head.find('|');
        const std::string word = pipe == std::string::npos ? head : head.substr(0, pipe);
        if (word.empty()) throw DataError(where + ": empty word");

        char* end = nullptr;
        const double value = std::strtod(polarity_field.c_str(), &end);
        if (end == polarity_field.c_str() || *end != '\0')
            throw DataError(where + ": polarity '" + polarity_field + "' is not a number");

        sums[fold_case(word)] += value;
        if (tab2 != std::string::npos) {
            const std::string inflections = line.substr(tab2 + 1);
            std::size_t start = 0;
            while (start <= inflections.size()) {
                auto comma = inflections.find(',', start);
                if (comma == std::string::npos) comma = inflections.size();
                const std::string form = inflections.substr(start, comma - start);
                if (!form.empty()) sums[fold_case(form)] += value;
                start = comma + 1;
            }
        }
    }
}

} // namespace detail

/// Loads a positive and a negative keyword file. Every line contributes
/// its base word and all inflections at the line's polarity; a word seen
/// multiple times has its polarities summed, then clamped to [-1, 1].
inline SentimentLexicon load_lexicon(const std::string& positive_path,
                                     const std::string& negative_path) {
    SentimentLexicon lexicon;
    lexicon.source_files = positive_path + " + " + negative_path;
    detail::read_lexicon_file(positive_path, lexicon.polarity);
    detail::read_lexicon_file(negative_path, lexicon.polarity);
    for (auto& [word, value] : lexicon.polarity) value = std::clamp(value, -1.0, 1.0);
    return lexicon;
}

/// Lexicon polarities projected onto a vocabulary: one entry per
/// vocabulary unigram found in the lexicon, n-grams always zero.
struct SentimentVector {
    SparseVector values;
    std::size_t matched = 0;  // vocabulary unigrams found in the lexicon
};

inline SentimentVector build_sentiment_vector(const Vocabulary& vocab,
                                              const SentimentLexicon& lexicon) {
    SentimentVector sv;
    sv.values.dim = vocab.dim();
    for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
        const auto& term = vocab.terms[i];
        if (term.find(' ') != std::string::npos) continue;  // unigram-only
        const auto it = lexicon.polarity.find(term);
        if (it == lexicon.polarity.end()) continue;
        ++sv.matched;
        if (it->second != 0.0) sv.values.entries.emplace_back(i, it->second);
    }
    return sv;
}

/// Cosine similarity between a document vector and the sentiment vector;
/// zero when either side has zero norm.
inline double sentiment_index(const SparseVector& x, const SentimentVector& sentiment) {
    if (x.dim != sentiment.values.dim)
        throw std::invalid_argument("sentiment vector dimension does not match document vector");
    const double ns = l2_norm(sentiment.values);
    const double nx = l2_norm(x);
    if (ns == 0.0 || nx == 0.0) return 0.0;
    return dot(sentiment.values, x) / (ns * nx);
}

/// Arithmetic mean of the sentiment index over each party's units;
/// zero-norm units count as 0 so denominators stay at the unit counts.
inline std::map<std::string, double> party_mean_sentiment(const LabeledCorpus& corpus,
                                                          const Vocabulary& vocab,
                                                          const SentimentVector& sentiment) {
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& unit : corpus.units) {
        if (unit.party.empty()) throw DataError("unit '" + unit.id + "' has no party label");
        const auto x = transform(unit.text, vocab);
        auto& [sum, count] = sums[unit.party];
        sum += sentiment_index(x, sentiment);
        ++count;
    }
    std::map<std::string, double> means;
    for (const auto& [party, acc] : sums)
        means[party] = acc.first / static_cast<double>(acc.second);
    return means;
}

/// Sample Pearson correlation; 0 for zero-variance input, with the
/// degenerate flag set when the out-parameter is given.
inline double pearson(std::span<const double> a, std::span<const double> b,
                      bool* degenerate = nullptr) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: sequences differ in length");
    if (a.size() < 2) throw std::invalid_argument("pearson: need at least 2 observations");
    if (degenerate) *degenerate = false;

    const auto n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return cov / std::sqrt(var_a * var_b);
}

/// Seats and government membership per party.
struct PartyPower {
    std::int64_t seats = 0;
    bool gov_member = false;
};
using PowerIndicators = std::map<std::string, PartyPower>;

struct PowerCorrelation {
    double r_gov = 0.0;
    double r_seats = 0.0;
    std::size_t n_parties = 0;
};

/// Correlates per-party mean sentiment with the two power indicators over
/// the parties present in both inputs.
inline PowerCorrelation power_correlation(const std::map<std::string, double>& mean_sentiment,
                                          const PowerIndicators& power) {
    std::vector<double> sentiment, gov, seats;
    for (const auto& [party, mean] : mean_sentiment) {
        const auto it = power.find(party);
        if (it == power.end()) continue;
        sentiment.push_back(mean);
        gov.push_back(it->second.gov_member ? 1.0 : 0.0);
        seats.push_back(static_cast<double>(it->second.seats));
    }
    if (sentiment.size() < 2)
        throw DataError("power correlation needs at least 2 parties present in both inputs");
    PowerCorrelation result;
    result.n_parties = sentiment.size();
    result.r_gov = pearson(sentiment, gov);
    result.r_seats = pearson(sentiment, seats);
    return result;
}

struct WordCorrelation {
    std::string term;
    double r = 0.0;
};

struct PartyWordCorrelations {
    std::string party;
    std::vector<WordCorrelation> top_positive;  // r descending
    std::vector<WordCorrelation> top_negative;  // r ascending
};

/// Pearson correlation of every term column against the one-vs-rest party
/// indicator. Stop-listed terms are excluded from the ranking; ties are
/// broken lexicographically. Requires at least two distinct labels.
inline PartyWordCorrelations word_label_correlation(
    const DocTermMatrix& matrix, std::span<const std::string> labels, const std::string& party,
    const Vocabulary& vocab, const std::unordered_set<std::string>& stopwords,
    std::size_t top_k = 10) {
    if (matrix.rows.size() != labels.size())
        throw std::invalid_argument("matrix row count does not match label count");
    if (matrix.dim != vocab.dim())
        throw std::invalid_argument("matrix dimension does not match vocabulary");

    const std::size_t n = matrix.rows.size();
    std::vector<double> indicator(n, 0.0);
    bool party_seen = false, rest_seen = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == party) {
            indicator[i] = 1.0;
            party_seen = true;
        } else {
            rest_seen = true;
        }
    }
    if (!party_seen) throw DataError("party '" + party + "' does not occur in the labels");
    if (!rest_seen)
        throw DataError("all documents belong to '" + party + "': indicator has zero variance");

    // Column-major view of the sparse rows, then a dense column per term.
    std::vector<std::vector<std::pair<std::size_t, double>>> columns(matrix.dim);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [term_index, value] : matrix.rows[i].entries)
            columns[term_index].emplace_back(i, value);

    std::vector<WordCorrelation> correlations;
    correlations.reserve(matrix.dim);
    std::vector<double> column(n, 0.0);
    for (std::size_t t = 0; t < matrix.dim; ++t) {
        if (stopwords.count(vocab.terms[t])) continue;
        std::fill(column.begin(), column.end(), 0.0);
        for (const auto& [doc, value] : columns[t]) column[doc] = value;
        correlations.push_back({vocab.terms[t], pearson(column, indicator)});
    }

    PartyWordCorrelations result;
    result.party = party;
    const std::size_t k = std::min(top_k, correlations.size());

    auto by_r_desc = [](const WordCorrelation& a, const WordCorrelation& b) {
        if (a.r != b.r) return a.r > b.r;
        return a.term < b.term;
    };
    auto by_r_asc = [](const WordCorrelation& a, const WordCorrelation& b) {
        if (a.r != b.r) return a.r < b.r;
        return a.term < b.term;
    };
    std::sort(correlations.begin(), correlations.end(), by_r_desc);
    result.top_positive.assign(correlations.begin(), correlations.begin() + k);
    std::sort(correlations.begin(), correlations.end(), by_r_asc);
    result.top_negative.assign(correlations.begin(), correlations.begin() + k);
    return result;
}

/// One folded token per line; blank lines are skipped.
inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword file '" + path + "'");
    std::unordered_set<std::string> stopwords;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string token = detail::trim(line);
        if (!token.empty()) stopwords.insert(fold_case(token));
    }
    return stopwords;
}

} // namespace polibias
