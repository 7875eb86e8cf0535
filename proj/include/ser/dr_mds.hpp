#pragma once

#include <utility>
#include <vector>

#include "ser/dr_spectral.hpp"
#include "ser/matrix.hpp"

namespace ser {

struct MdsConfig {
    int L = 2;
    int max_iter = 300;
    double rel_tol = 1e-6;
    enum class Init { cmds, random } init = Init::cmds;
    unsigned seed = 42;
};

struct StressTrace {
    // Raw stress per iteration for smacof / pattern search; normalized
    // stress-1 per iteration for the non-metric variant.
    std::vector<double> stress;
};

// Raw stress sum_{i<j} (d_ij(y) - delta_ij)^2.
double raw_stress(const Matrix& delta, const Matrix& y);

// Guttman-transform majorization; stress trace is non-increasing.
std::pair<Embedding, StressTrace> smacof_fit(const Matrix& d, const MdsConfig& cfg);

// Coordinate pattern search on raw stress with step halving.
std::pair<Embedding, StressTrace> pattern_search_mds_fit(const Matrix& d, const MdsConfig& cfg);

// Alternating isotonic disparities / majorization steps; reports stress-1.
std::pair<Embedding, StressTrace> nonmetric_mds_fit(const Matrix& d, const MdsConfig& cfg);

}  // namespace ser
