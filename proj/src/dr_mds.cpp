#include "ser/dr_mds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ser/errors.hpp"
#include "ser/numerics.hpp"

namespace ser {

namespace {

void center_columns(Matrix& y) {
    for (std::size_t c = 0; c < y.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i) mean += y(i, c);
        mean /= static_cast<double>(y.rows());
        for (std::size_t i = 0; i < y.rows(); ++i) y(i, c) -= mean;
    }
}

Matrix init_config(const Matrix& d, const MdsConfig& cfg) {
    Matrix y;
    if (cfg.init == MdsConfig::Init::cmds) {
        y = cmds_fit(d, cfg.L).Y;
    } else {
        std::mt19937 rng(cfg.seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        y = Matrix(d.rows(), cfg.L);
        for (auto& v : y.data()) v = dist(rng);
    }
    // Coincident init points are stationary under the Guttman transform (their
    // B-matrix coupling is zero) and freeze pattern-search symmetry too; break
    // ties with a tiny deterministic jitter.
    double maxd = 0.0;
    for (double v : d.data()) maxd = std::max(maxd, v);
    bool coincident = false;
    const Matrix dy = pairwise_distances(y, Metric::euclidean);
    for (std::size_t i = 0; i < y.rows() && !coincident; ++i)
        for (std::size_t j = i + 1; j < y.rows(); ++j)
            if (dy(i, j) <= 1e-9 * maxd) {
                coincident = true;
                break;
            }
    if (coincident) {
        std::mt19937 rng(cfg.seed + 0x9e3779b9u);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : y.data()) v += 1e-4 * maxd * u(rng);
    }
    center_columns(y);
    return y;
}

Matrix embedded_distances(const Matrix& y) {
    return pairwise_distances(y, Metric::euclidean);
}

void check_degenerate(const Matrix& d) {
    double maxd = 0.0;
    for (double v : d.data()) maxd = std::max(maxd, v);
    if (d.rows() >= 2 && maxd == 0.0)
        throw DegenerateData("mds: all dissimilarities are zero");
}

// One Guttman-transform update of y toward target dissimilarities delta.
Matrix guttman_step(const Matrix& delta, const Matrix& y, const Matrix& dy) {
    const std::size_t n = y.rows(), L = y.cols();
    Matrix out(n, L);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double bii = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double bij = (dy(i, j) > 1e-300) ? -delta(i, j) / dy(i, j) : 0.0;
            bii -= bij;
            for (std::size_t c = 0; c < L; ++c) out(i, c) += bij * y(j, c);
        }
        for (std::size_t c = 0; c < L; ++c) {
            out(i, c) += bii * y(i, c);
            out(i, c) /= static_cast<double>(n);
        }
    }
    center_columns(out);
    return out;
}

}  // namespace

double raw_stress(const Matrix& delta, const Matrix& y) {
    const Matrix dy = embedded_distances(y);
    double s = 0.0;
    for (std::size_t i = 0; i < delta.rows(); ++i)
        for (std::size_t j = i + 1; j < delta.cols(); ++j) {
            const double r = dy(i, j) - delta(i, j);
            s += r * r;
        }
    return s;
}

std::pair<Embedding, StressTrace> smacof_fit(const Matrix& d, const MdsConfig& cfg) {
    validate_distance_matrix(d);
    if (d.rows() < 2) throw UserError("smacof: need at least 2 points");
    if (cfg.max_iter < 1 || cfg.rel_tol <= 0.0) throw UserError("smacof: bad config");
    check_degenerate(d);

    Matrix y = init_config(d, cfg);
    StressTrace trace;
    double stress = raw_stress(d, y);
    trace.stress.push_back(stress);
    for (int t = 0; t < cfg.max_iter; ++t) {
        const Matrix dy = embedded_distances(y);
        Matrix y_next = guttman_step(d, y, dy);
        const double next = raw_stress(d, y_next);
        if (next > stress) break;  // float noise at convergence; keep the better iterate
        y = std::move(y_next);
        trace.stress.push_back(next);
        const double drop = stress - next;
        stress = next;
        if (trace.stress[trace.stress.size() - 2] <= 1e-300) break;
        if (drop / trace.stress[trace.stress.size() - 2] < cfg.rel_tol) break;
    }
    return {{std::move(y), "smacof", cfg.L}, std::move(trace)};
}

std::pair<Embedding, StressTrace> pattern_search_mds_fit(const Matrix& d, const MdsConfig& cfg) {
    validate_distance_matrix(d);
    if (d.rows() < 2) throw UserError("pattern search mds: need at least 2 points");
    if (cfg.max_iter < 1 || cfg.rel_tol <= 0.0) throw UserError("pattern search mds: bad config");
    check_degenerate(d);

    const std::size_t n = d.rows();
    const auto L = static_cast<std::size_t>(cfg.L);
    Matrix y = init_config(d, cfg);
    Matrix dy = embedded_distances(y);
    double stress = raw_stress(d, y);

    double maxd = 0.0;
    for (double v : d.data()) maxd = std::max(maxd, v);
    const double initial_step = maxd / 4.0;
    double step = initial_step;

    StressTrace trace;
    trace.stress.push_back(stress);

    std::vector<double> cand_dist(n);
    for (int pass = 0; pass < cfg.max_iter && step >= cfg.rel_tol * initial_step; ++pass) {
        bool improved = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best_delta = 0.0;
            std::size_t best_axis = 0;
            double best_dir = 0.0;
            std::vector<double> best_dist;
            for (std::size_t a = 0; a < L; ++a) {
                for (const double dir : {+1.0, -1.0}) {
                    const double yi_new = y(i, a) + dir * step;
                    double delta_stress = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) {
                            cand_dist[j] = 0.0;
                            continue;
                        }
                        double s = 0.0;
                        for (std::size_t c = 0; c < L; ++c) {
                            const double diff =
                                (c == a ? yi_new : y(i, c)) - y(j, c);
                            s += diff * diff;
                        }
                        const double nd = std::sqrt(s);
                        cand_dist[j] = nd;
                        const double r_new = nd - d(i, j);
                        const double r_old = dy(i, j) - d(i, j);
                        delta_stress += r_new * r_new - r_old * r_old;
                    }
                    if (delta_stress < best_delta) {
                        best_delta = delta_stress;
                        best_axis = a;
                        best_dir = dir;
                        best_dist = cand_dist;
                    }
                }
            }
            if (best_delta < 0.0) {
                y(i, best_axis) += best_dir * step;
                for (std::size_t j = 0; j < n; ++j) {
                    dy(i, j) = best_dist[j];
                    dy(j, i) = best_dist[j];
                }
                stress += best_delta;
                improved = true;
            }
        }
        trace.stress.push_back(stress);
        if (!improved) step *= 0.5;
    }
    center_columns(y);
    return {{std::move(y), "psmds", cfg.L}, std::move(trace)};
}

std::pair<Embedding, StressTrace> nonmetric_mds_fit(const Matrix& d, const MdsConfig& cfg) {
    validate_distance_matrix(d);
    const std::size_t n = d.rows();
    if (n < 3) throw UserError("nonmetric mds: need at least 3 points");
    if (cfg.max_iter < 1 || cfg.rel_tol <= 0.0) throw UserError("nonmetric mds: bad config");
    check_degenerate(d);

    struct Pair {
        std::size_t i, j;
        double delta;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j, d(i, j)});
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.delta < b.delta; });
    if (pairs.front().delta == pairs.back().delta)
        throw RankDegenerate("nonmetric mds: all dissimilarities are equal");

    // tie groups over the sorted order
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
    for (std::size_t b = 0; b < pairs.size();) {
        std::size_t e = b + 1;
        while (e < pairs.size() && pairs[e].delta == pairs[b].delta) ++e;
        groups.emplace_back(b, e);
        b = e;
    }

    Matrix y = init_config(d, cfg);
    StressTrace trace;
    Matrix disp(n, n);
    for (int t = 0; t < cfg.max_iter; ++t) {
        const Matrix dy = embedded_distances(y);
        double sum_d2 = 0.0;
        for (const auto& p : pairs) sum_d2 += dy(p.i, p.j) * dy(p.i, p.j);
        if (sum_d2 <= 1e-300) break;

        // isotonic disparities over the rank order of delta, ties pooled
        std::vector<double> gm(groups.size()), gw(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double s = 0.0;
            for (std::size_t p = groups[g].first; p < groups[g].second; ++p)
                s += dy(pairs[p].i, pairs[p].j);
            gw[g] = static_cast<double>(groups[g].second - groups[g].first);
            gm[g] = s / gw[g];
        }
        const auto fitted = isotonic_regression(gm, gw);
        std::vector<double> dhat(pairs.size());
        double sum_h2 = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t p = groups[g].first; p < groups[g].second; ++p) {
                dhat[p] = fitted[g];
                sum_h2 += fitted[g] * fitted[g];
            }
        if (sum_h2 <= 1e-300) break;
        const double scale = std::sqrt(sum_d2 / sum_h2);
        for (auto& v : dhat) v *= scale;

        double sq_resid = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double r = dy(pairs[p].i, pairs[p].j) - dhat[p];
            sq_resid += r * r;
        }
        const double stress1 = std::sqrt(sq_resid / sum_d2);
        trace.stress.push_back(stress1);
        if (trace.stress.size() >= 2) {
            const double prev = trace.stress[trace.stress.size() - 2];
            if (prev <= 1e-300 || (prev - stress1) / prev < cfg.rel_tol) break;
        }

        for (auto& v : disp.data()) v = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p)
            disp(pairs[p].i, pairs[p].j) = disp(pairs[p].j, pairs[p].i) = dhat[p];
        y = guttman_step(disp, y, dy);
    }
    return {{std::move(y), "nonmetric", cfg.L}, std::move(trace)};
}

}  // namespace ser
