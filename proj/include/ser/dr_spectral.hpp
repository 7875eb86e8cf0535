#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ser/matrix.hpp"
#include "ser/numerics.hpp"

namespace ser {

struct LinearProjection {
    Matrix T;                  // L x m, orthonormal rows for PCA
    std::vector<double> mean;  // length m
};

struct Embedding {
    Matrix Y;  // n x L
    std::string method;
    int L = 0;
};

// Principal components of the sample covariance (divisor n-1).
std::pair<LinearProjection, Embedding> pca_fit(const Matrix& x, int L);

Matrix pca_transform(const LinearProjection& proj, const Matrix& x);

// Classical (Torgerson) MDS; negative eigenvalues clamped to zero.
Embedding cmds_fit(const Matrix& d, int L);

Embedding isomap_fit(const Matrix& x, int L, int k, Metric metric = Metric::euclidean);

Embedding lle_fit(const Matrix& x, int L, int k);

// Reconstruction weights for one point against a set of anchor rows,
// constrained to sum to 1 (Tikhonov-regularized local Gram solve).
std::vector<double> barycentric_weights(std::span<const double> point, const Matrix& anchors,
                                        const std::vector<int>& anchor_idx);

Embedding mlle_fit(const Matrix& x, int L, int k);

Embedding spectral_embed_fit(const Matrix& x, int L, int k);

}  // namespace ser
