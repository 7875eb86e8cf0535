#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ser/matrix.hpp"

namespace ser {

enum class Metric { euclidean, cosine };

Metric parse_metric(const std::string& name);

// Symmetric n x n dissimilarities: zero diagonal, nonnegative.
Matrix pairwise_distances(const Matrix& x, Metric metric);

void validate_distance_matrix(const Matrix& d);

struct SymmetricEigen {
    std::vector<double> values;  // sorted descending
    Matrix vectors;              // orthonormal columns, vectors.col(i) pairs with values[i]
};

// Full spectrum of a symmetric matrix. Deterministic sign convention: the
// largest-magnitude component of each eigenvector is made positive.
SymmetricEigen eigh(const Matrix& a);

struct NeighborGraph {
    std::size_t n = 0;
    int k = 0;
    // Symmetrized adjacency: (i,j) present implies (j,i) with equal weight.
    std::vector<std::vector<std::pair<int, double>>> edges;
};

// Per-row k nearest indices by D, self excluded, ties toward smaller index.
std::vector<std::vector<int>> knn_indices(const Matrix& d, int k);

NeighborGraph knn_graph(const Matrix& d, int k);

// Sizes of connected components, largest first.
std::vector<int> component_sizes(const NeighborGraph& g);

// All-pairs shortest paths by per-source Dijkstra. Throws DisconnectedGraph.
Matrix shortest_paths(const NeighborGraph& g);

// B = -1/2 J D2 J with J = I - 11^T/n.
Matrix double_center(const Matrix& d2);

// Weighted pool-adjacent-violators; output non-decreasing.
std::vector<double> isotonic_regression(const std::vector<double>& y,
                                        const std::vector<double>& w);

}  // namespace ser
