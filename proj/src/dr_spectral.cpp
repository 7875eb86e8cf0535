#include "ser/dr_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "ser/errors.hpp"

namespace ser {

namespace {

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += x(i, c);
    for (auto& v : mean) v /= static_cast<double>(x.rows());
    return mean;
}

Matrix centered(const Matrix& x, const std::vector<double>& mean) {
    Matrix xc = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < x.cols(); ++c) xc(i, c) -= mean[c];
    return xc;
}

// Local Gram system with sum-to-one constraint via normalization.
std::vector<double> local_weights(const Matrix& x, std::span<const double> point,
                                  const std::vector<int>& nbr) {
    const std::size_t k = nbr.size(), m = x.cols();
    Matrix g(k, k);
    std::vector<std::vector<double>> z(k, std::vector<double>(m));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < m; ++c)
            z[a][c] = x(static_cast<std::size_t>(nbr[a]), c) - point[c];
    double tr = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += z[a][c] * z[b][c];
            g(a, b) = g(b, a) = s;
            if (a == b) tr += s;
        }
    double reg = (k > m) ? 1e-3 * tr / static_cast<double>(k) : 1e-12 * tr;
    if (reg <= 0.0) reg = 1e-12;
    for (std::size_t a = 0; a < k; ++a) g(a, a) += reg;
    auto w = solve_linear(g, std::vector<double>(k, 1.0));
    double sum = 0.0;
    for (double v : w) sum += v;
    if (sum == 0.0) throw NumericError("local weight system produced zero-sum weights");
    for (auto& v : w) v /= sum;
    return w;
}

// Bottom L+1 eigenvectors in ascending eigenvalue order with the trivial
// direction u deflated away. The bottom eigenvalues can be degenerate (e.g.
// exact affine reconstruction on a regular grid puts 1, x and y all in the
// null space), so the trivial direction must be projected out of the whole
// subspace, not matched to a single column.
Matrix bottom_nonconstant(const SymmetricEigen& eig, std::size_t n, int L,
                          const std::vector<double>* u_raw = nullptr) {
    std::vector<double> u(n, 1.0);
    if (u_raw) u = *u_raw;
    double unorm = 0.0;
    for (double v : u) unorm += v * v;
    unorm = std::sqrt(unorm);
    for (auto& v : u) v /= unorm;

    std::vector<std::vector<double>> kept;
    for (int p = 0; p <= L && static_cast<int>(kept.size()) < L; ++p) {
        const std::size_t c = n - 1 - static_cast<std::size_t>(p);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = eig.vectors(i, c);
        double du = 0.0;
        for (std::size_t i = 0; i < n; ++i) du += u[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= du * u[i];
        for (const auto& q : kept) {
            double dq = 0.0;
            for (std::size_t i = 0; i < n; ++i) dq += q[i] * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= dq * q[i];
        }
        double norm = 0.0;
        for (double t : v) norm += t * t;
        norm = std::sqrt(norm);
        if (norm < 1e-6) continue;  // the deflated trivial direction
        std::size_t peak = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[peak])) peak = i;
        const double flip = v[peak] < 0.0 ? -1.0 : 1.0;
        for (auto& t : v) t *= flip / norm;
        kept.push_back(std::move(v));
    }
    if (static_cast<int>(kept.size()) < L)
        throw EigenFailure("embedding subspace collapsed during deflation");
    Matrix y(n, L);
    for (int l = 0; l < L; ++l)
        for (std::size_t i = 0; i < n; ++i) y(i, l) = kept[static_cast<std::size_t>(l)][i];
    return y;
}

}  // namespace

std::pair<LinearProjection, Embedding> pca_fit(const Matrix& x, int L) {
    const std::size_t n = x.rows(), m = x.cols();
    if (n < 2) throw UserError("pca: need at least 2 rows");
    if (L < 1 || static_cast<std::size_t>(L) > std::min(n - 1, m))
        throw UserError("pca: L must be in [1, min(n-1, m)]");
    const auto mean = column_means(x);
    const Matrix xc = centered(x, mean);

    LinearProjection proj;
    proj.mean = mean;
    proj.T = Matrix(L, m);

    const double denom = static_cast<double>(n - 1);
    if (m <= n) {
        Matrix cov = matmul(transpose(xc), xc);
        for (auto& v : cov.data()) v /= denom;
        double tr = 0.0;
        for (std::size_t c = 0; c < m; ++c) tr += cov(c, c);
        if (tr <= 1e-300) throw DegenerateData("pca: data has zero variance");
        const auto eig = eigh(cov);
        for (int l = 0; l < L; ++l)
            for (std::size_t c = 0; c < m; ++c) proj.T(l, c) = eig.vectors(c, l);
    } else {
        // Gram-matrix route for wide data: eigenvectors of Xc Xc^T map back
        // through Xc^T.
        Matrix gram = matmul(xc, transpose(xc));
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += gram(i, i);
        if (tr <= 1e-300) throw DegenerateData("pca: data has zero variance");
        const auto eig = eigh(gram);
        for (int l = 0; l < L; ++l) {
            const double mu = std::max(0.0, eig.values[l]);
            if (mu <= 1e-12 * std::max(eig.values[0], 1e-300)) continue;  // rank-deficient axis
            const double inv = 1.0 / std::sqrt(mu);
            for (std::size_t c = 0; c < m; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += xc(i, c) * eig.vectors(i, l);
                proj.T(l, c) = s * inv;
            }
        }
    }
    Embedding emb{pca_transform(proj, x), "pca", L};
    return {std::move(proj), std::move(emb)};
}

Matrix pca_transform(const LinearProjection& proj, const Matrix& x) {
    if (x.cols() != proj.mean.size()) throw UserError("pca_transform: width mismatch");
    return matmul(centered(x, proj.mean), transpose(proj.T));
}

Embedding cmds_fit(const Matrix& d, int L) {
    validate_distance_matrix(d);
    const std::size_t n = d.rows();
    if (L < 1 || static_cast<std::size_t>(L) > n - 1)
        throw UserError("cmds: L must be in [1, n-1]");
    Matrix d2(n, n);
    for (std::size_t i = 0; i < n * n; ++i) d2.data()[i] = d.data()[i] * d.data()[i];
    const auto eig = eigh(double_center(d2));
    Matrix y(n, L);
    for (int l = 0; l < L; ++l) {
        const double scale = std::sqrt(std::max(0.0, eig.values[l]));
        for (std::size_t i = 0; i < n; ++i) y(i, l) = scale * eig.vectors(i, l);
    }
    return {std::move(y), "cmds", L};
}

Embedding isomap_fit(const Matrix& x, int L, int k, Metric metric) {
    const Matrix d = pairwise_distances(x, metric);
    const auto g = knn_graph(d, k);
    Matrix geo;
    try {
        geo = shortest_paths(g);
    } catch (const DisconnectedGraph& e) {
        throw DisconnectedGraph(std::string(e.what()) + "; try a larger --neighbors value",
                                e.component_sizes);
    }
    auto emb = cmds_fit(geo, L);
    emb.method = "isomap";
    return emb;
}

std::vector<double> barycentric_weights(std::span<const double> point, const Matrix& anchors,
                                        const std::vector<int>& anchor_idx) {
    return local_weights(anchors, point, anchor_idx);
}

Embedding lle_fit(const Matrix& x, int L, int k) {
    const std::size_t n = x.rows();
    if (L < 1 || static_cast<std::size_t>(L) > n - 2)
        throw UserError("lle: L must be in [1, n-2]");
    if (L > k) std::cerr << "warning: lle with L > k is poorly conditioned\n";
    const Matrix d = pairwise_distances(x, Metric::euclidean);
    const auto nbrs = knn_indices(d, k);

    std::vector<std::vector<double>> weights(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        weights[i] = local_weights(x, x.row(i), nbrs[i]);
    }

    // M = sum_i (e_i - w_i)(e_i - w_i)^T with w_i supported on neighbors
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) += 1.0;
        const auto& nb = nbrs[i];
        const auto& w = weights[i];
        for (std::size_t a = 0; a < nb.size(); ++a) {
            const auto ja = static_cast<std::size_t>(nb[a]);
            m(i, ja) -= w[a];
            m(ja, i) -= w[a];
            for (std::size_t b = 0; b < nb.size(); ++b)
                m(ja, static_cast<std::size_t>(nb[b])) += w[a] * w[b];
        }
    }
    const auto eig = eigh(m);
    return {bottom_nonconstant(eig, n, L), "lle", L};
}

Embedding mlle_fit(const Matrix& x, int L, int k) {
    const std::size_t n = x.rows();
    if (L < 1 || static_cast<std::size_t>(L) > n - 2)
        throw UserError("mlle: L must be in [1, n-2]");
    if (k < L + 1) throw UserError("mlle: requires k >= L + 1");
    const std::size_t uk = static_cast<std::size_t>(k);
    const Matrix d = pairwise_distances(x, Metric::euclidean);
    const auto nbrs = knn_indices(d, k);

    // Per-point local Gram spectra, regularized weights, and null-space ratios.
    std::vector<std::vector<double>> evals(n), w_reg(n);
    std::vector<Matrix> evecs(n);
    std::vector<double> rho(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& nb = nbrs[i];
        Matrix g(uk, uk);
        double tr = 0.0;
        for (std::size_t a = 0; a < uk; ++a)
            for (std::size_t b = a; b < uk; ++b) {
                double s = 0.0;
                for (std::size_t c = 0; c < x.cols(); ++c)
                    s += (x(static_cast<std::size_t>(nb[a]), c) - x(i, c)) *
                         (x(static_cast<std::size_t>(nb[b]), c) - x(i, c));
                g(a, b) = g(b, a) = s;
                if (a == b) tr += s;
            }
        auto eig = eigh(g);
        for (auto& v : eig.values) v = std::max(0.0, v);
        double head = 0.0, tail = 0.0;
        for (int j = 0; j < L; ++j) head += eig.values[j];
        for (std::size_t j = L; j < uk; ++j) tail += eig.values[j];
        rho[i] = (head > 0.0) ? tail / head : 0.0;
        evals[i] = std::move(eig.values);
        evecs[i] = std::move(eig.vectors);
        w_reg[i] = local_weights(x, x.row(i), nb);
    }

    std::vector<double> sorted_rho = rho;
    std::sort(sorted_rho.begin(), sorted_rho.end());
    const double eta = (n % 2 == 1)
                           ? sorted_rho[n / 2]
                           : 0.5 * (sorted_rho[n / 2 - 1] + sorted_rho[n / 2]);

    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& lam = evals[i];
        // s = largest null-space size in [1, k-L] with tail/head ratio below eta
        int s = 1;
        for (int cand = static_cast<int>(uk) - L; cand >= 1; --cand) {
            double tail = 0.0, head = 0.0;
            for (std::size_t j = uk - static_cast<std::size_t>(cand); j < uk; ++j) tail += lam[j];
            for (std::size_t j = 0; j < uk - static_cast<std::size_t>(cand); ++j) head += lam[j];
            if (head > 0.0 && tail / head < eta) {
                s = cand;
                break;
            }
        }
        const auto us = static_cast<std::size_t>(s);
        // Vi: eigenvectors of the s smallest local eigenvalues
        Matrix vi(uk, us);
        for (std::size_t c = 0; c < us; ++c)
            for (std::size_t r = 0; r < uk; ++r) vi(r, c) = evecs[i](r, uk - us + c);
        std::vector<double> v(us, 0.0);
        for (std::size_t c = 0; c < us; ++c)
            for (std::size_t r = 0; r < uk; ++r) v[c] += vi(r, c);
        double vnorm = 0.0;
        for (double t : v) vnorm += t * t;
        vnorm = std::sqrt(vnorm);
        const double alpha = vnorm / std::sqrt(static_cast<double>(us));
        std::vector<double> h(us);
        double hnorm = 0.0;
        for (std::size_t c = 0; c < us; ++c) {
            h[c] = alpha - v[c];
            hnorm += h[c] * h[c];
        }
        hnorm = std::sqrt(hnorm);
        if (hnorm < 1e-12)
            std::fill(h.begin(), h.end(), 0.0);
        else
            for (auto& t : h) t /= hnorm;
        // Wi = Vi - 2 (Vi h) h^T + (1 - alpha) w_reg 1^T, columns sum to 1
        std::vector<double> vih(uk, 0.0);
        for (std::size_t r = 0; r < uk; ++r)
            for (std::size_t c = 0; c < us; ++c) vih[r] += vi(r, c) * h[c];
        Matrix wi(uk, us);
        for (std::size_t r = 0; r < uk; ++r)
            for (std::size_t c = 0; c < us; ++c)
                wi(r, c) = vi(r, c) - 2.0 * vih[r] * h[c] + (1.0 - alpha) * w_reg[i][r];
        // accumulate M += sum_l what_l what_l^T, what_l = scatter(Wi(:,l)) - e_i
        const auto& nb = nbrs[i];
        for (std::size_t l = 0; l < us; ++l) {
            for (std::size_t a = 0; a < uk; ++a) {
                const auto ra = static_cast<std::size_t>(nb[a]);
                for (std::size_t b = 0; b < uk; ++b)
                    m(ra, static_cast<std::size_t>(nb[b])) += wi(a, l) * wi(b, l);
                m(ra, i) -= wi(a, l);
                m(i, ra) -= wi(a, l);
            }
            m(i, i) += 1.0;
        }
    }
    const auto eig = eigh(m);
    return {bottom_nonconstant(eig, n, L), "mlle", L};
}

Embedding spectral_embed_fit(const Matrix& x, int L, int k) {
    const std::size_t n = x.rows();
    if (L < 1 || static_cast<std::size_t>(L) > n - 2)
        throw UserError("spectral: L must be in [1, n-2]");
    const Matrix d = pairwise_distances(x, Metric::euclidean);
    const auto g = knn_graph(d, k);
    const auto sizes = component_sizes(g);
    if (sizes.size() > 1) {
        std::string msg = "spectral: graph is disconnected (component sizes:";
        for (int s : sizes) msg += " " + std::to_string(s);
        msg += "); try a larger --neighbors value";
        throw DisconnectedGraph(msg, sizes);
    }
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) deg[i] = static_cast<double>(g.edges[i].size());
    Matrix lap = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : g.edges[i])
            lap(i, static_cast<std::size_t>(j)) -=
                1.0 / std::sqrt(deg[i] * deg[static_cast<std::size_t>(j)]);
    const auto eig = eigh(lap);
    std::vector<double> trivial(n);  // D^{1/2} 1 spans the zero eigenspace of L_sym
    for (std::size_t i = 0; i < n; ++i) trivial[i] = std::sqrt(deg[i]);
    Matrix y = bottom_nonconstant(eig, n, L, &trivial);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = 1.0 / std::sqrt(deg[i]);
        for (int l = 0; l < L; ++l) y(i, l) *= scale;
    }
    return {std::move(y), "spectral", L};
}

}  // namespace ser
