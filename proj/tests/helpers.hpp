#pragma once

#include <random>
#include <string>
#include <vector>

#include "ser/dataio.hpp"
#include "ser/matrix.hpp"
#include "ser/numerics.hpp"

namespace test {

inline ser::Matrix random_matrix(std::size_t n, std::size_t m, unsigned seed,
                                 double scale = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, scale);
    ser::Matrix x(n, m);
    for (auto& v : x.data()) v = dist(rng);
    return x;
}

inline ser::Matrix random_symmetric(std::size_t n, unsigned seed) {
    auto a = random_matrix(n, n, seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = v;
        }
    return a;
}

// Feature table with round-robin speakers/sessions and the given labels.
inline ser::FeatureTable make_table(ser::Matrix x, const std::vector<std::string>& labels,
                                    int n_speakers = 2, int n_sessions = 2) {
    ser::FeatureTable t;
    t.X = std::move(x);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ser::Utterance u;
        u.id = "u" + std::to_string(i);
        u.speaker_id = "spk" + std::to_string(i % n_speakers);
        u.session_id = "ses" + std::to_string(i % n_sessions);
        u.label = labels[i];
        t.rows.push_back(u);
    }
    for (std::size_t j = 0; j < t.X.cols(); ++j) t.column_names.push_back("f" + std::to_string(j));
    return t;
}

// Mean fraction of shared indices between the k-NN sets of two point sets.
inline double neighborhood_overlap(const ser::Matrix& a, const ser::Matrix& b, int k) {
    const auto da = ser::pairwise_distances(a, ser::Metric::euclidean);
    const auto db = ser::pairwise_distances(b, ser::Metric::euclidean);
    const auto na = ser::knn_indices(da, k);
    const auto nb = ser::knn_indices(db, k);
    double total = 0.0;
    for (std::size_t i = 0; i < na.size(); ++i) {
        int shared = 0;
        for (int x : na[i])
            for (int y : nb[i])
                if (x == y) ++shared;
        total += static_cast<double>(shared) / k;
    }
    return total / static_cast<double>(na.size());
}

}  // namespace test
