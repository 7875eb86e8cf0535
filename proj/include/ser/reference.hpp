#pragma once

#include "ser/numerics.hpp"

// Straightforward serial implementations kept as cross-checks for the fast
// kernels. Used by the test suites and the kernel benchmark, not by the
// library pipeline.
namespace ser::reference {

// Cyclic Jacobi rotations, full-matrix storage. Same output contract as
// ser::eigh (descending values, sign convention).
SymmetricEigen eigh_jacobi(const Matrix& a, int max_sweeps = 100);

// Naive double-loop distances.
Matrix pairwise_distances(const Matrix& x, Metric metric);

// Floyd-Warshall all-pairs shortest paths (no connectivity check; infinity
// where unreachable).
Matrix floyd_warshall(const NeighborGraph& g);

}  // namespace ser::reference
