#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "ser/errors.hpp"
#include "ser/numerics.hpp"
#include "ser/reference.hpp"

using ser::Matrix;

TEST_CASE("pairwise distances: closed-form cases") {
    Matrix x(3, 2);
    x(0, 0) = 0;
    x(0, 1) = 0;
    x(1, 0) = 3;
    x(1, 1) = 4;
    x(2, 0) = 3;
    x(2, 1) = 4;
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    CHECK(d(0, 1) == doctest::Approx(5.0).epsilon(1e-12));  // 3-4-5 triangle
    CHECK(d(1, 2) == 0.0);                                  // duplicated row

    Matrix y(2, 2);
    y(0, 0) = 1;
    y(1, 1) = 1;
    CHECK(ser::pairwise_distances(y, ser::Metric::cosine)(0, 1) ==
          doctest::Approx(1.0).epsilon(1e-12));  // orthogonal rows
}

TEST_CASE("cosine distance: zero-vector rules") {
    Matrix x(3, 2);
    x(2, 0) = 1;  // rows 0 and 1 are zero vectors
    const auto d = ser::pairwise_distances(x, ser::Metric::cosine);
    CHECK(d(0, 1) == 0.0);
    CHECK(d(0, 2) == 1.0);
}

TEST_CASE("euclidean distances satisfy the triangle inequality") {
    const auto x = test::random_matrix(15, 4, 11);
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    ser::validate_distance_matrix(d);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j)
            for (std::size_t l = 0; l < 15; ++l)
                CHECK(d(i, j) <= d(i, l) + d(l, j) + 1e-10);
}

TEST_CASE("fast distances match the serial reference") {
    const auto x = test::random_matrix(30, 6, 12);
    for (auto metric : {ser::Metric::euclidean, ser::Metric::cosine}) {
        const auto fast = ser::pairwise_distances(x, metric);
        const auto ref = ser::reference::pairwise_distances(x, metric);
        CHECK(ser::max_abs_diff(fast, ref) < 1e-10);
    }
}

TEST_CASE("eigh: identity spectrum") {
    const auto e = ser::eigh(Matrix::identity(3));
    for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigh: closed-form 2x2") {
    Matrix a(2, 2);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 2;
    const auto e = ser::eigh(a);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(s).epsilon(1e-10));
    CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(s).epsilon(1e-10));
    CHECK(e.vectors(0, 0) * e.vectors(1, 0) > 0);   // (1,1) direction
    CHECK(e.vectors(0, 1) * e.vectors(1, 1) < 0);   // (1,-1) direction
}

TEST_CASE("eigh: reconstruction, orthonormality, trace on random 12x12") {
    const auto a = test::random_symmetric(12, 21);
    const auto e = ser::eigh(a);

    Matrix lam(12, 12);
    for (std::size_t i = 0; i < 12; ++i) lam(i, i) = e.values[i];
    const auto recon = ser::matmul(ser::matmul(e.vectors, lam), ser::transpose(e.vectors));
    CHECK(ser::frobenius_norm([&] {
              Matrix diff = recon;
              for (std::size_t i = 0; i < diff.data().size(); ++i)
                  diff.data()[i] -= a.data()[i];
              return diff;
          }()) < 1e-8);

    const auto vtv = ser::matmul(ser::transpose(e.vectors), e.vectors);
    CHECK(ser::max_abs_diff(vtv, Matrix::identity(12)) < 1e-10);

    double trace = 0, sum = 0;
    for (std::size_t i = 0; i < 12; ++i) trace += a(i, i);
    for (double v : e.values) sum += v;
    CHECK(sum == doctest::Approx(trace).epsilon(1e-8));

    // A v_i = lambda_i v_i
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t r = 0; r < 12; ++r) {
            double av = 0;
            for (std::size_t c = 0; c < 12; ++c) av += a(r, c) * e.vectors(c, i);
            CHECK(av == doctest::Approx(e.values[i] * e.vectors(r, i)).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("eigh agrees with the Jacobi reference") {
    const auto a = test::random_symmetric(20, 33);
    const auto fast = ser::eigh(a);
    const auto ref = ser::reference::eigh_jacobi(a);
    for (std::size_t i = 0; i < 20; ++i)
        CHECK(fast.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("eigh rejects asymmetric input") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(ser::eigh(a), ser::UserError);
}

TEST_CASE("knn_graph: collinear symmetrization and complete graph") {
    Matrix x(3, 1);
    x(0, 0) = 0;
    x(1, 0) = 1;
    x(2, 0) = 2.5;
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    const auto g1 = ser::knn_graph(d, 1);
    CHECK(g1.edges[1].size() == 2);  // middle point picked by both ends

    const auto g2 = ser::knn_graph(d, 2);
    for (const auto& adj : g2.edges) CHECK(adj.size() == 2);
}

TEST_CASE("knn_indices matches a full-sort oracle") {
    const auto x = test::random_matrix(20, 3, 44);
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    const auto got = ser::knn_indices(d, 4);
    for (std::size_t i = 0; i < 20; ++i) {
        std::vector<int> order;
        for (int j = 0; j < 20; ++j)
            if (j != static_cast<int>(i)) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::make_pair(d(i, a), a) < std::make_pair(d(i, b), b);
        });
        order.resize(4);
        CHECK(got[i] == order);
    }
}

TEST_CASE("shortest_paths: path graph and disconnected error") {
    Matrix x(3, 1);
    x(0, 0) = 0;
    x(1, 0) = 1;
    x(2, 0) = 2;
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    const auto sp = ser::shortest_paths(ser::knn_graph(d, 1));
    CHECK(sp(0, 2) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix y(4, 1);
    y(0, 0) = 0;
    y(1, 0) = 0.1;
    y(2, 0) = 100;
    y(3, 0) = 100.1;
    const auto dy = ser::pairwise_distances(y, ser::Metric::euclidean);
    const auto g = ser::knn_graph(dy, 1);
    CHECK_THROWS_AS(ser::shortest_paths(g), ser::DisconnectedGraph);
    try {
        ser::shortest_paths(g);
    } catch (const ser::DisconnectedGraph& e) {
        CHECK(e.component_sizes == std::vector<int>{2, 2});
    }
}

TEST_CASE("shortest_paths matches Floyd-Warshall on a random connected graph") {
    const auto x = test::random_matrix(15, 2, 55);
    const auto d = ser::pairwise_distances(x, ser::Metric::euclidean);
    const auto g = ser::knn_graph(d, 4);
    REQUIRE(ser::component_sizes(g).size() == 1);
    const auto sp = ser::shortest_paths(g);
    const auto ref = ser::reference::floyd_warshall(g);
    CHECK(ser::max_abs_diff(sp, ref) < 1e-12);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j)
            for (std::size_t l = 0; l < 15; ++l)
                CHECK(sp(i, j) <= sp(i, l) + sp(l, j) + 1e-10);
}

TEST_CASE("double_center: hand case and row sums") {
    CHECK(ser::frobenius_norm(ser::double_center(Matrix(3, 3))) == 0.0);

    Matrix d2(2, 2);
    d2(0, 1) = d2(1, 0) = 4.0;  // two points at distance 2
    const auto b = ser::double_center(d2);
    CHECK(b(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(b(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

    // 5 collinear points -> rank-1 Gram matrix
    Matrix x(5, 1);
    for (int i = 0; i < 5; ++i) x(i, 0) = 1.7 * i;
    const auto dist = ser::pairwise_distances(x, ser::Metric::euclidean);
    Matrix sq(5, 5);
    for (std::size_t i = 0; i < 25; ++i) sq.data()[i] = dist.data()[i] * dist.data()[i];
    const auto g = ser::double_center(sq);
    const auto e = ser::eigh(g);
    CHECK(std::abs(e.values[1]) < 1e-9 * e.values[0]);
    for (std::size_t i = 0; i < 5; ++i) {
        double row_sum = 0;
        for (std::size_t j = 0; j < 5; ++j) row_sum += g(i, j);
        CHECK(std::abs(row_sum) < 1e-10);
    }
}

namespace {

// Exhaustive isotonic oracle: enumerate every contiguous block partition,
// keep those with non-decreasing weighted block means, take the cheapest.
std::vector<double> isotonic_oracle(const std::vector<double>& y, const std::vector<double>& w) {
    const std::size_t n = y.size();
    std::vector<double> best;
    double best_cost = 1e300;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        double prev_mean = -1e300;
        bool ok = true;
        double cost = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool cut = i == n - 1 || (mask >> i) & 1u;
            if (!cut) continue;
            double sw = 0, swy = 0;
            for (std::size_t j = start; j <= i; ++j) {
                sw += w[j];
                swy += w[j] * y[j];
            }
            const double mean = swy / sw;
            if (mean < prev_mean - 1e-12) {
                ok = false;
                break;
            }
            for (std::size_t j = start; j <= i; ++j) {
                fit[j] = mean;
                cost += w[j] * (mean - y[j]) * (mean - y[j]);
            }
            prev_mean = mean;
            start = i + 1;
        }
        if (ok && cost < best_cost) {
            best_cost = cost;
            best = fit;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("isotonic regression") {
    const std::vector<double> inc{1, 2, 3, 4};
    CHECK(ser::isotonic_regression(inc, {1, 1, 1, 1}) == inc);

    const auto two = ser::isotonic_regression({3, 1}, {1, 1});
    CHECK(two[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(two[1] == doctest::Approx(2.0).epsilon(1e-12));

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uy(-2, 2), uw(0.2, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> y(8), w(8);
        for (int i = 0; i < 8; ++i) {
            y[i] = uy(rng);
            w[i] = uw(rng);
        }
        const auto got = ser::isotonic_regression(y, w);
        const auto want = isotonic_oracle(y, w);
        for (int i = 0; i < 8; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8));
        for (int i = 1; i < 8; ++i) CHECK(got[i] >= got[i - 1] - 1e-12);
    }
}

TEST_CASE("isotonic regression rejects non-positive weights") {
    CHECK_THROWS_AS(ser::isotonic_regression({1, 2}, {1, 0}), ser::UserError);
}
