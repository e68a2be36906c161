#pragma once

#include "mstm/model.hpp"

#include <random>

namespace testutil {

inline mstm::Matrix random_matrix(int rows, int cols, std::uint64_t seed,
                                  double lo = -2.0, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    mstm::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline mstm::Vector random_vector(int n, std::uint64_t seed, double lo = -2.0,
                                  double hi = 2.0) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> u(lo, hi);
    mstm::Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

inline mstm::Matrix random_prob_rows(int rows, int cols, std::uint64_t seed) {
    mstm::Matrix m = random_matrix(rows, cols, seed, 0.05, 1.0);
    for (int i = 0; i < rows; ++i) m.row(i) /= m.row(i).sum();
    return m;
}

inline std::vector<int> random_labels(int n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5bf0a8b1ull);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    return out;
}

// Two well-separated 2-D blobs: x0 < 0 -> class 0, x0 > 0 -> class 1.
inline void two_blob_dataset(int n, std::uint64_t seed, mstm::Matrix& X,
                             std::vector<int>& labels) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.5);
    X.resize(n, 2);
    labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int c = i % 2;
        X(i, 0) = (c == 0 ? -2.0 : 2.0) + g(rng);
        X(i, 1) = g(rng);
        labels[static_cast<std::size_t>(i)] = c;
    }
}

} // namespace testutil
