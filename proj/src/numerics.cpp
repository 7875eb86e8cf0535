#include "ser/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "ser/errors.hpp"

namespace ser {

Metric parse_metric(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    throw UserError("unknown metric: " + name);
}

Matrix pairwise_distances(const Matrix& x, Metric metric) {
    const std::size_t n = x.rows(), m = x.cols();
    Matrix d(n, n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : x.row(i)) s += v * v;
        sq[i] = s;
    }
#pragma omp parallel for schedule(dynamic, 8)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            const auto* xi = x.row(i).data();
            const auto* xj = x.row(j).data();
            for (std::size_t c = 0; c < m; ++c) dot += xi[c] * xj[c];
            double dist;
            if (metric == Metric::euclidean) {
                dist = std::sqrt(std::max(0.0, sq[i] + sq[j] - 2.0 * dot));
            } else {
                const double ni = std::sqrt(sq[i]), nj = std::sqrt(sq[j]);
                if (ni == 0.0 && nj == 0.0)
                    dist = 0.0;
                else if (ni == 0.0 || nj == 0.0)
                    dist = 1.0;
                else
                    dist = std::max(0.0, 1.0 - dot / (ni * nj));
            }
            d(i, j) = d(j, i) = dist;
        }
    }
    return d;
}

void validate_distance_matrix(const Matrix& d) {
    if (d.rows() != d.cols()) throw UserError("distance matrix must be square");
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (std::fabs(d(i, i)) > 1e-12) throw UserError("distance matrix diagonal must be zero");
        for (std::size_t j = i + 1; j < d.cols(); ++j) {
            if (d(i, j) < 0.0) throw UserError("distance matrix must be nonnegative");
            if (std::fabs(d(i, j) - d(j, i)) > 1e-12)
                throw UserError("distance matrix must be symmetric");
        }
    }
}

namespace {

// Householder reduction of a to tridiagonal form; a is replaced by the
// accumulated orthogonal transform, d holds the diagonal, e the subdiagonal.
void householder_tridiag(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(a.rows());
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a(i, k) * a(k, j);
                for (int k = 0; k <= l; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (int j = 0; j <= l; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations accumulated into z.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw EigenFailure("eigh: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

SymmetricEigen eigh(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw UserError("eigh: matrix must be square");
    double amax = 0.0;
    for (double v : a.data()) amax = std::max(amax, std::fabs(v));
    const double tol = 1e-10 * std::max(1.0, amax);
    Matrix work = a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::fabs(a(i, j) - a(j, i)) > tol)
                throw UserError("eigh: matrix not symmetric within tolerance");
            work(i, j) = work(j, i) = 0.5 * (a(i, j) + a(j, i));
        }

    std::vector<double> d(n), e(n);
    if (n == 1) {
        d[0] = work(0, 0);
        work(0, 0) = 1.0;
    } else {
        householder_tridiag(work, d, e);
        tridiag_ql(d, e, work);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return d[i] > d[j]; });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.values[c] = d[src];
        std::size_t imax = 0;
        double vmax = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double av = std::fabs(work(r, src));
            if (av > vmax) {
                vmax = av;
                imax = r;
            }
        }
        const double sign = (work(imax, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * work(r, src);
    }
    return out;
}

std::vector<std::vector<int>> knn_indices(const Matrix& d, int k) {
    const int n = static_cast<int>(d.rows());
    if (k < 1 || k > n - 1) throw UserError("knn: k must be in [1, n-1]");
    std::vector<std::vector<int>> out(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx;
        idx.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) idx.push_back(j);
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
            if (d(i, a) != d(i, b)) return d(i, a) < d(i, b);
            return a < b;
        });
        idx.resize(k);
        out[i] = std::move(idx);
    }
    return out;
}

NeighborGraph knn_graph(const Matrix& d, int k) {
    const int n = static_cast<int>(d.rows());
    const auto nbrs = knn_indices(d, k);
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j : nbrs[i]) {
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    NeighborGraph g;
    g.n = static_cast<std::size_t>(n);
    g.k = k;
    g.edges.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& a = adj[i];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        g.edges[i].reserve(a.size());
        for (int j : a) g.edges[i].emplace_back(j, d(i, j));
    }
    return g;
}

std::vector<int> component_sizes(const NeighborGraph& g) {
    const int n = static_cast<int>(g.n);
    std::vector<int> comp(n, -1);
    std::vector<int> sizes;
    for (int s = 0; s < n; ++s) {
        if (comp[s] != -1) continue;
        int size = 0;
        std::vector<int> stack{s};
        comp[s] = static_cast<int>(sizes.size());
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            ++size;
            for (const auto& [v, w] : g.edges[u])
                if (comp[v] == -1) {
                    comp[v] = comp[s];
                    stack.push_back(v);
                }
        }
        sizes.push_back(size);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

Matrix shortest_paths(const NeighborGraph& g) {
    const auto sizes = component_sizes(g);
    if (sizes.size() > 1) {
        std::string msg = "graph is disconnected (component sizes:";
        for (int s : sizes) msg += " " + std::to_string(s);
        msg += ")";
        throw DisconnectedGraph(msg, sizes);
    }
    const int n = static_cast<int>(g.n);
    Matrix d(n, n);
#pragma omp parallel for schedule(dynamic, 4)
    for (int s = 0; s < n; ++s) {
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        dist[s] = 0.0;
        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            const auto [du, u] = pq.top();
            pq.pop();
            if (du > dist[u]) continue;
            for (const auto& [v, w] : g.edges[u]) {
                const double nd = du + w;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        for (int j = 0; j < n; ++j) d(s, j) = dist[j];
    }
    // enforce exact symmetry against float drift in summation order
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (d(i, j) + d(j, i));
            d(i, j) = d(j, i) = v;
        }
    return d;
}

Matrix double_center(const Matrix& d2) {
    const std::size_t n = d2.rows();
    std::vector<double> rmean(n, 0.0);
    double gmean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rmean[i] += d2(i, j);
        rmean[i] /= static_cast<double>(n);
        gmean += rmean[i];
    }
    gmean /= static_cast<double>(n);
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b(i, j) = -0.5 * (d2(i, j) - rmean[i] - rmean[j] + gmean);
    return b;
}

std::vector<double> isotonic_regression(const std::vector<double>& y,
                                        const std::vector<double>& w) {
    if (y.size() != w.size()) throw UserError("isotonic_regression: length mismatch");
    for (double wi : w)
        if (wi <= 0.0) throw UserError("isotonic_regression: weights must be positive");
    const std::size_t n = y.size();
    // blocks as (weighted mean, total weight, count)
    std::vector<double> mean, weight;
    std::vector<std::size_t> count;
    for (std::size_t i = 0; i < n; ++i) {
        mean.push_back(y[i]);
        weight.push_back(w[i]);
        count.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const double tw = weight[weight.size() - 2] + weight.back();
            const double tm = (mean[mean.size() - 2] * weight[weight.size() - 2] +
                               mean.back() * weight.back()) /
                              tw;
            mean.pop_back();
            weight.pop_back();
            const std::size_t c = count.back();
            count.pop_back();
            mean.back() = tm;
            weight.back() = tw;
            count.back() += c;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t b = 0; b < mean.size(); ++b)
        out.insert(out.end(), count[b], mean[b]);
    return out;
}

}  // namespace ser
