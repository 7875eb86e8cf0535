// Compares the parallel kernels against the serial reference implementations
// and reports wall time plus the largest numeric discrepancy.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "ser/dr_mds.hpp"
#include "ser/numerics.hpp"
#include "ser/reference.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

ser::Matrix random_matrix(std::size_t n, std::size_t m, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    ser::Matrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = dist(rng);
    return x;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 600;
    if (argc > 1) n = static_cast<std::size_t>(std::atoi(argv[1]));
    const std::size_t m = 40;
    const auto x = random_matrix(n, m, 7);

    std::printf("n = %zu, m = %zu\n\n", n, m);

    auto t0 = clock_type::now();
    const auto d_fast = ser::pairwise_distances(x, ser::Metric::euclidean);
    const double t_fast = seconds_since(t0);
    t0 = clock_type::now();
    const auto d_ref = ser::reference::pairwise_distances(x, ser::Metric::euclidean);
    const double t_ref = seconds_since(t0);
    std::printf("pairwise_distances   fast %8.3fs   reference %8.3fs   maxabs diff %.3e\n",
                t_fast, t_ref, ser::max_abs_diff(d_fast, d_ref));

    // Symmetric test matrix from the distances.
    ser::Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = std::exp(-d_fast(i, j));

    t0 = clock_type::now();
    const auto e_fast = ser::eigh(a);
    const double te_fast = seconds_since(t0);
    t0 = clock_type::now();
    const auto e_ref = ser::reference::eigh_jacobi(a);
    const double te_ref = seconds_since(t0);
    double val_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        val_diff = std::max(val_diff, std::abs(e_fast.values[i] - e_ref.values[i]));
    std::printf("eigh                 fast %8.3fs   reference %8.3fs   max value diff %.3e\n",
                te_fast, te_ref, val_diff);

    t0 = clock_type::now();
    const auto g = ser::knn_graph(d_fast, 8);
    const auto sp_fast = ser::shortest_paths(g);
    const double tg_fast = seconds_since(t0);
    t0 = clock_type::now();
    const auto sp_ref = ser::reference::floyd_warshall(g);
    const double tg_ref = seconds_since(t0);
    std::printf("shortest_paths       fast %8.3fs   reference %8.3fs   maxabs diff %.3e\n",
                tg_fast, tg_ref, ser::max_abs_diff(sp_fast, sp_ref));

    ser::MdsConfig cfg;
    cfg.L = 2;
    cfg.max_iter = 50;
    t0 = clock_type::now();
    const auto [emb, trace] = ser::smacof_fit(d_fast, cfg);
    std::printf("smacof (50 iters)    fast %8.3fs   final stress %.6e\n",
                seconds_since(t0), trace.stress.back());
    return 0;
}
