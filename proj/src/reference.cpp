#include "ser/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ser/errors.hpp"

namespace ser::reference {

SymmetricEigen eigh_jacobi(const Matrix& a, int max_sweeps) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw UserError("eigh_jacobi: matrix must be square");
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    const double norm_a = frobenius_norm(a);

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * w(i, j) * w(i, j);
        if (std::sqrt(off) < 1e-11 * std::max(norm_a, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p), wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k), wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps) throw EigenFailure("eigh_jacobi: did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return w(i, i) > w(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.values[c] = w(src, src);
        std::size_t imax = 0;
        double vmax = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            if (std::fabs(v(r, src)) > vmax) {
                vmax = std::fabs(v(r, src));
                imax = r;
            }
        const double sign = (v(imax, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(r, src);
    }
    return out;
}

Matrix pairwise_distances(const Matrix& x, Metric metric) {
    const std::size_t n = x.rows(), m = x.cols();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (metric == Metric::euclidean) {
                double s = 0.0;
                for (std::size_t c = 0; c < m; ++c) {
                    const double diff = x(i, c) - x(j, c);
                    s += diff * diff;
                }
                d(i, j) = std::sqrt(s);
            } else {
                double dot = 0.0, ni = 0.0, nj = 0.0;
                for (std::size_t c = 0; c < m; ++c) {
                    dot += x(i, c) * x(j, c);
                    ni += x(i, c) * x(i, c);
                    nj += x(j, c) * x(j, c);
                }
                if (ni == 0.0 && nj == 0.0)
                    d(i, j) = 0.0;
                else if (ni == 0.0 || nj == 0.0)
                    d(i, j) = 1.0;
                else
                    d(i, j) = std::max(0.0, 1.0 - dot / std::sqrt(ni * nj));
            }
        }
    // mirror the upper triangle so rounding cannot break symmetry
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
    return d;
}

Matrix floyd_warshall(const NeighborGraph& g) {
    const std::size_t n = g.n;
    const double inf = std::numeric_limits<double>::infinity();
    Matrix d(n, n, inf);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : g.edges[i]) d(i, j) = std::min(d(i, j), w);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
    return d;
}

}  // namespace ser::reference
