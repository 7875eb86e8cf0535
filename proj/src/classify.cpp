#include "ser/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "ser/errors.hpp"

namespace ser {

namespace {

double row_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double d = a[c] - b[c];
            s += d * d;
        }
        return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        dot += a[c] * b[c];
        na += a[c] * a[c];
        nb += b[c] * b[c];
    }
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

std::vector<std::string> sorted_classes(const FeatureTable& t) {
    std::set<std::string> s;
    for (const auto& u : t.rows) s.insert(u.label);
    return {s.begin(), s.end()};
}

void softmax_rows(Matrix& z) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double mx = z(i, 0);
        for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(i, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
            z(i, c) = std::exp(z(i, c) - mx);
            sum += z(i, c);
        }
        for (std::size_t c = 0; c < z.cols(); ++c) z(i, c) /= sum;
    }
}

}  // namespace

std::vector<std::string> knn_classify(const FeatureTable& train, const FeatureTable& test,
                                      const KnnConfig& cfg) {
    const auto n = static_cast<int>(train.n());
    if (n == 0) throw UserError("knn: empty training set");
    if (train.m() != test.m()) throw UserError("knn: feature width mismatch");
    if (cfg.k < 1 || cfg.k > n) throw UserError("knn: k must be in [1, train size]");

    std::vector<std::string> out(test.n());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long qq = 0; qq < static_cast<long long>(test.n()); ++qq) {
        const auto q = static_cast<std::size_t>(qq);
        std::vector<std::pair<double, int>> dist(n);
        for (int i = 0; i < n; ++i)
            dist[i] = {row_distance(test.X.row(q), train.X.row(i), cfg.metric), i};
        std::partial_sort(dist.begin(), dist.begin() + cfg.k, dist.end());
        std::map<std::string, std::pair<int, double>> votes;  // label -> (count, inv dist sum)
        for (int i = 0; i < cfg.k; ++i) {
            auto& v = votes[train.rows[static_cast<std::size_t>(dist[i].second)].label];
            v.first += 1;
            v.second += 1.0 / (dist[i].first + 1e-12);
        }
        const std::string* best = nullptr;
        for (const auto& [label, v] : votes) {
            if (!best) {
                best = &label;
                continue;
            }
            const auto& bv = votes.at(*best);
            if (v.first > bv.first ||
                (v.first == bv.first && v.second > bv.second))
                best = &label;
            // equal count and inv-dist sum: keep the lexicographically smaller,
            // which is the earlier map key
        }
        out[q] = *best;
    }
    return out;
}

SoftmaxModel softmax_train(const FeatureTable& train, double C, unsigned /*seed*/) {
    const auto classes = sorted_classes(train);
    if (classes.size() < 2) throw SingleClass("softmax: training data has a single class");
    if (C <= 0.0) throw UserError("softmax: C must be positive");
    const std::size_t n = train.n(), m = train.m(), k = classes.size();
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), train.rows[i].label) -
            classes.begin());

    Matrix w(k, m);
    std::vector<double> b(k, 0.0);

    auto objective = [&](const Matrix& wc, const std::vector<double>& bc) {
        Matrix z = matmul(train.X, transpose(wc));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) z(i, c) += bc[c];
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = z(i, 0);
            for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, z(i, c));
            double lse = 0.0;
            for (std::size_t c = 0; c < k; ++c) lse += std::exp(z(i, c) - mx);
            loss += mx + std::log(lse) - z(i, y[i]);
        }
        loss /= static_cast<double>(n);
        double reg = 0.0;
        for (double v : wc.data()) reg += v * v;
        return loss + reg / (2.0 * C);
    };

    double f = objective(w, b);
    for (int iter = 0; iter < 5000; ++iter) {
        Matrix p = matmul(train.X, transpose(w));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) p(i, c) += b[c];
        softmax_rows(p);
        for (std::size_t i = 0; i < n; ++i) p(i, y[i]) -= 1.0;
        Matrix gw = matmul(transpose(p), train.X);
        for (std::size_t i = 0; i < gw.data().size(); ++i)
            gw.data()[i] = gw.data()[i] / static_cast<double>(n) + w.data()[i] / C;
        std::vector<double> gb(k, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) gb[c] += p(i, c);
        for (auto& v : gb) v /= static_cast<double>(n);

        double gmax = 0.0, gsq = 0.0;
        for (double v : gw.data()) {
            gmax = std::max(gmax, std::fabs(v));
            gsq += v * v;
        }
        for (double v : gb) {
            gmax = std::max(gmax, std::fabs(v));
            gsq += v * v;
        }
        if (gmax < 1e-6) break;

        double step = 1.0;
        Matrix w_new = w;
        std::vector<double> b_new = b;
        double f_new = f;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < w.data().size(); ++i)
                w_new.data()[i] = w.data()[i] - step * gw.data()[i];
            for (std::size_t c = 0; c < k; ++c) b_new[c] = b[c] - step * gb[c];
            f_new = objective(w_new, b_new);
            if (f_new <= f - 1e-4 * step * gsq) break;
            step *= 0.5;
        }
        if (f_new >= f) break;  // no descent possible at float precision
        w = std::move(w_new);
        b = std::move(b_new);
        f = f_new;
    }
    return {std::move(w), std::move(b), C, classes};
}

std::pair<std::vector<std::string>, Matrix> softmax_predict(const SoftmaxModel& model,
                                                            const FeatureTable& x) {
    if (x.m() != model.W.cols()) throw UserError("softmax_predict: width mismatch");
    Matrix p = matmul(x.X, transpose(model.W));
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t c = 0; c < p.cols(); ++c) p(i, c) += model.b[c];
    softmax_rows(p);
    std::vector<std::string> labels(x.n());
    for (std::size_t i = 0; i < x.n(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.cols(); ++c)
            if (p(i, c) > p(i, best)) best = c;
        labels[i] = model.classes[best];
    }
    return {std::move(labels), std::move(p)};
}

namespace {

double kernel_eval(std::span<const double> a, std::span<const double> b,
                   const SvmKernel& kernel) {
    if (kernel.type == SvmKernel::Type::linear) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
        return s;
    }
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return std::exp(-kernel.gamma * s);
}

}  // namespace

SmoSolution smo_solve(const Matrix& x, const std::vector<double>& y, const SvmKernel& kernel,
                      double C, double tol) {
    const auto n = static_cast<int>(x.rows());
    if (static_cast<int>(y.size()) != n) throw UserError("smo: label length mismatch");

    Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            k(i, j) = k(j, i) = kernel_eval(x.row(i), x.row(j), kernel);

    std::vector<double> alpha(n, 0.0), f(n, 0.0);  // f_i = sum_j alpha_j y_j K_ij
    const long long max_iter = std::max(200000LL, 2000LL * n);
    bool converged = false;

    const auto in_up = [&](int t) {
        return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
    };
    const auto in_low = [&](int t) {
        return (y[t] < 0 && alpha[t] < C) || (y[t] > 0 && alpha[t] > 0);
    };
    // Clipped update for pair (i, j); returns false when the step is zero.
    const auto try_step = [&](int i, int j) {
        double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if (eta <= 1e-12) eta = 1e-12;
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, alpha[j] - alpha[i]);
            hi = std::min(C, C + alpha[j] - alpha[i]);
        } else {
            lo = std::max(0.0, alpha[i] + alpha[j] - C);
            hi = std::min(C, alpha[i] + alpha[j]);
        }
        const double ei = f[i] - y[i], ej = f[j] - y[j];
        double aj_new = std::clamp(alpha[j] + y[j] * (ei - ej) / eta, lo, hi);
        const double ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new);
        const double di = ai_new - alpha[i], dj = aj_new - alpha[j];
        if (std::fabs(dj) < 1e-14 && std::fabs(di) < 1e-14) return false;
        alpha[i] = ai_new;
        alpha[j] = aj_new;
        for (int t = 0; t < n; ++t) f[t] += di * y[i] * k(i, t) + dj * y[j] * k(j, t);
        return true;
    };

    for (long long iter = 0; iter < max_iter; ++iter) {
        // maximal-violation working pair: i in I_up with minimal E, j in I_low
        // with maximal E, where E_t = f_t - y_t
        int i = -1, j = -1;
        double e_min = 0.0, e_max = 0.0;
        for (int t = 0; t < n; ++t) {
            const double e = f[t] - y[t];
            if (in_up(t) && (i < 0 || e < e_min)) {
                i = t;
                e_min = e;
            }
            if (in_low(t) && (j < 0 || e > e_max)) {
                j = t;
                e_max = e;
            }
        }
        if (i < 0 || j < 0 || e_max - e_min <= tol) {
            converged = true;
            break;
        }
        if (try_step(i, j)) continue;
        // The best pair is blocked by clipping; fall back to any still-violating
        // movable pair before concluding anything about convergence.
        bool moved = false;
        for (int a = 0; a < n && !moved; ++a) {
            if (!in_up(a)) continue;
            const double ea = f[a] - y[a];
            for (int b = 0; b < n && !moved; ++b) {
                if (!in_low(b) || (f[b] - y[b]) - ea <= tol) continue;
                moved = try_step(a, b);
            }
        }
        if (!moved) {
            converged = true;  // no violating pair can move at float precision
            break;
        }
    }
    if (!converged) throw SmoFailure("smo did not converge within the iteration budget");

    double bias;
    double sum = 0.0;
    int free_count = 0;
    for (int t = 0; t < n; ++t)
        if (alpha[t] > 1e-8 && alpha[t] < C - 1e-8) {
            sum += y[t] - f[t];
            ++free_count;
        }
    if (free_count > 0) {
        bias = sum / free_count;
    } else {
        double up = std::numeric_limits<double>::infinity();
        double low = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            const double e = y[t] - f[t];
            const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] < 0 && alpha[t] < C) || (y[t] > 0 && alpha[t] > 0);
            if (in_up) up = std::min(up, e);
            if (in_low) low = std::max(low, e);
        }
        bias = 0.5 * (up + low);
        if (!std::isfinite(bias)) bias = 0.0;
    }
    return {std::move(alpha), y, bias};
}

SvmModel svm_train(const FeatureTable& train, SvmKernel kernel, double C) {
    const auto classes = sorted_classes(train);
    if (classes.size() < 2) throw SingleClass("svm: training data has a single class");
    if (C <= 0.0) throw UserError("svm: C must be positive");
    if (kernel.type == SvmKernel::Type::rbf && kernel.gamma <= 0.0) {
        double mean = 0.0;
        for (double v : train.X.data()) mean += v;
        mean /= static_cast<double>(train.X.data().size());
        double var = 0.0;
        for (double v : train.X.data()) var += (v - mean) * (v - mean);
        var /= static_cast<double>(train.X.data().size());
        kernel.gamma = var > 0.0 ? 1.0 / (static_cast<double>(train.m()) * var) : 1.0;
    }

    SvmModel model;
    model.classes = classes;
    model.kernel = kernel;
    model.C = C;
    for (const auto& cls : classes) {
        std::vector<double> y(train.n());
        for (std::size_t i = 0; i < train.n(); ++i)
            y[i] = train.rows[i].label == cls ? 1.0 : -1.0;
        const auto sol = smo_solve(train.X, y, kernel, C);
        BinarySvm bin;
        bin.bias = sol.bias;
        std::vector<int> sv_idx;
        for (std::size_t i = 0; i < train.n(); ++i)
            if (sol.alpha[i] > 1e-12) sv_idx.push_back(static_cast<int>(i));
        bin.support_vectors = Matrix(sv_idx.size(), train.m());
        for (std::size_t r = 0; r < sv_idx.size(); ++r) {
            const auto i = static_cast<std::size_t>(sv_idx[r]);
            for (std::size_t c = 0; c < train.m(); ++c)
                bin.support_vectors(r, c) = train.X(i, c);
            bin.coef.push_back(sol.alpha[i] * sol.y[i]);
        }
        model.ovr.push_back(std::move(bin));
    }
    return model;
}

std::pair<std::vector<std::string>, Matrix> svm_predict(const SvmModel& model,
                                                        const FeatureTable& x) {
    if (!model.ovr.empty() && model.ovr.front().support_vectors.cols() != x.m())
        throw UserError("svm_predict: width mismatch");
    Matrix decisions(x.n(), model.classes.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long qq = 0; qq < static_cast<long long>(x.n()); ++qq) {
        const auto q = static_cast<std::size_t>(qq);
        for (std::size_t c = 0; c < model.ovr.size(); ++c) {
            const auto& bin = model.ovr[c];
            double g = bin.bias;
            for (std::size_t s = 0; s < bin.coef.size(); ++s)
                g += bin.coef[s] *
                     kernel_eval(bin.support_vectors.row(s), x.X.row(q), model.kernel);
            decisions(q, c) = g;
        }
    }
    std::vector<std::string> labels(x.n());
    for (std::size_t q = 0; q < x.n(); ++q) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < model.classes.size(); ++c)
            if (decisions(q, c) > decisions(q, best)) best = c;
        labels[q] = model.classes[best];
    }
    return {std::move(labels), std::move(decisions)};
}

}  // namespace ser
