#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polibias {

/// Sparse vector in R^dim. Entries hold (index, value) pairs with strictly
/// increasing indices and no explicit zeros.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::size_t, double>> entries;

    bool empty() const { return entries.empty(); }
};

inline double dot(const SparseVector& a, const SparseVector& b) {
    if (a.dim != b.dim)
        throw std::invalid_argument("sparse dot: dimension mismatch (" +
                                    std::to_string(a.dim) + " vs " + std::to_string(b.dim) + ")");
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        const auto ia = a.entries[i].first;
        const auto ib = b.entries[j].first;
        if (ia == ib) {
            acc += a.entries[i].second * b.entries[j].second;
            ++i;
            ++j;
        } else if (ia < ib) {
            ++i;
        } else {
            ++j;
        }
    }
    return acc;
}

inline double l2_norm(const SparseVector& v) {
    double acc = 0.0;
    for (const auto& [idx, value] : v.entries) acc += value * value;
    return std::sqrt(acc);
}

/// Scales a non-zero vector to unit L2 norm; zero vectors stay zero.
inline void l2_normalize(SparseVector& v) {
    const double norm = l2_norm(v);
    if (norm == 0.0) return;
    for (auto& [idx, value] : v.entries) value /= norm;
}

/// Document-term matrix: one sparse row per document, all rows sharing dim.
/// Row ids stay aligned to the corpus unit ids they came from.
struct DocTermMatrix {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<SparseVector> rows;

    std::size_t size() const { return rows.size(); }
};

} // namespace polibias
