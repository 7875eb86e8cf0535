#include "ser/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "ser/autoencoder.hpp"
#include "ser/dr_mds.hpp"
#include "ser/errors.hpp"

namespace ser {

std::tuple<FeatureTable, FeatureTable, NormStats> zscore_fit_apply(const FeatureTable& train,
                                                                   const FeatureTable& test) {
    if (test.n() > 0 && train.m() != test.m())
        throw UserError("zscore: train/test width mismatch");
    const std::size_t n = train.n(), m = train.m();
    if (n == 0) throw UserError("zscore: empty training set");
    NormStats stats;
    stats.mu.assign(m, 0.0);
    stats.sigma.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m; ++c) stats.mu[c] += train.X(i, c);
    for (auto& v : stats.mu) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m; ++c) {
            const double d = train.X(i, c) - stats.mu[c];
            stats.sigma[c] += d * d;
        }
    for (auto& v : stats.sigma) {
        v = std::sqrt(v / static_cast<double>(n));
        if (v == 0.0) v = 1.0;
    }
    auto apply = [&](const FeatureTable& t) {
        FeatureTable out = t;
        for (std::size_t i = 0; i < t.n(); ++i)
            for (std::size_t c = 0; c < m; ++c)
                out.X(i, c) = (t.X(i, c) - stats.mu[c]) / stats.sigma[c];
        return out;
    };
    return {apply(train), apply(test), std::move(stats)};
}

CvScheme parse_scheme(const std::string& name) {
    if (name == "lospo") return CvScheme::lospo;
    if (name == "loso") return CvScheme::loso;
    throw UserError("unknown cross-validation scheme: " + name);
}

FoldPlan make_folds(const std::vector<Utterance>& rows, CvScheme scheme) {
    std::map<std::string, std::vector<int>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& key = scheme == CvScheme::lospo ? rows[i].speaker_id : rows[i].session_id;
        groups[key].push_back(static_cast<int>(i));
    }
    if (groups.size() < 2)
        throw UserError(std::string("make_folds: need at least 2 distinct ") +
                        (scheme == CvScheme::lospo ? "speakers" : "sessions"));
    FoldPlan plan;
    plan.scheme = scheme;
    for (const auto& [key, test_idx] : groups) {
        std::vector<int> train_idx;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& k = scheme == CvScheme::lospo ? rows[i].speaker_id : rows[i].session_id;
            if (k != key) train_idx.push_back(static_cast<int>(i));
        }
        plan.folds.emplace_back(std::move(train_idx), test_idx);
    }
    return plan;
}

std::tuple<ConfusionMatrix, double, double> confusion_and_accuracies(
    const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
    if (truth.size() != pred.size())
        throw UserError("confusion: truth/prediction length mismatch");
    std::set<std::string> class_set(truth.begin(), truth.end());
    class_set.insert(pred.begin(), pred.end());
    ConfusionMatrix cm;
    cm.classes.assign(class_set.begin(), class_set.end());
    const std::size_t k = cm.classes.size();
    cm.counts.assign(k * k, 0);
    auto index = [&](const std::string& label) {
        return static_cast<std::size_t>(
            std::lower_bound(cm.classes.begin(), cm.classes.end(), label) - cm.classes.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[index(truth[i]) * k + index(pred[i])];

    long long correct = 0, total = 0;
    double recall_sum = 0.0;
    int scored_classes = 0;
    for (std::size_t c = 0; c < k; ++c) {
        long long row_total = 0;
        for (std::size_t p = 0; p < k; ++p) row_total += cm.at(c, p);
        correct += cm.at(c, c);
        total += row_total;
        if (row_total > 0) {
            recall_sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(row_total);
            ++scored_classes;
        }
    }
    const double wa = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    const double ua = scored_classes > 0 ? recall_sum / scored_classes : 0.0;
    return {std::move(cm), wa, ua};
}

std::vector<int> PipelineSpec::knn_grid_or_default() const {
    if (!knn_grid.empty()) return knn_grid;
    std::vector<int> g(30);
    for (int i = 0; i < 30; ++i) g[i] = i + 1;
    return g;
}

std::vector<double> PipelineSpec::c_grid_or_default() const {
    if (!c_grid.empty()) return c_grid;
    return {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
}

Embedding run_dr(const Matrix& x, const PipelineSpec& spec) {
    const auto& m = spec.dr_method;
    if (m == "none") return {x, "none", static_cast<int>(x.cols())};
    if (m == "pca") return pca_fit(x, spec.L).second;
    if (m == "cmds") return cmds_fit(pairwise_distances(x, spec.metric), spec.L);
    if (m == "smacof" || m == "psmds" || m == "nonmetric") {
        MdsConfig cfg;
        cfg.L = spec.L;
        cfg.max_iter = spec.mds_max_iter;
        cfg.rel_tol = spec.mds_rel_tol;
        cfg.seed = spec.seed;
        const Matrix d = pairwise_distances(x, spec.metric);
        if (m == "smacof") return smacof_fit(d, cfg).first;
        if (m == "psmds") return pattern_search_mds_fit(d, cfg).first;
        return nonmetric_mds_fit(d, cfg).first;
    }
    if (m == "isomap") return isomap_fit(x, spec.L, spec.neighbors, spec.metric);
    if (m == "lle") return lle_fit(x, spec.L, spec.neighbors);
    if (m == "mlle") return mlle_fit(x, spec.L, spec.neighbors);
    if (m == "spectral") return spectral_embed_fit(x, spec.L, spec.neighbors);
    if (m == "autoencoder") {
        const auto ae_spec = default_autoencoder_spec(static_cast<int>(x.cols()), spec.L);
        TrainConfig cfg;
        cfg.learning_rate = spec.ae_learning_rate;
        cfg.batch_size = spec.ae_batch_size;
        cfg.epochs = spec.ae_epochs;
        cfg.seed = spec.seed;
        const auto [params, trace] = train_autoencoder(x, ae_spec, cfg);
        return encode(params, ae_spec, x);
    }
    throw UserError("unknown DR method: " + m);
}

std::pair<Matrix, Matrix> embed_split(const FeatureTable& train, const FeatureTable& test,
                                      const PipelineSpec& spec) {
    if (spec.mode == PipelineSpec::Mode::transductive) {
        Matrix stacked(train.n() + test.n(), train.m());
        for (std::size_t i = 0; i < train.n(); ++i)
            for (std::size_t c = 0; c < train.m(); ++c) stacked(i, c) = train.X(i, c);
        for (std::size_t i = 0; i < test.n(); ++i)
            for (std::size_t c = 0; c < train.m(); ++c)
                stacked(train.n() + i, c) = test.X(i, c);
        const Embedding emb = run_dr(stacked, spec);
        Matrix ytr(train.n(), emb.Y.cols()), yte(test.n(), emb.Y.cols());
        for (std::size_t i = 0; i < train.n(); ++i)
            for (std::size_t c = 0; c < emb.Y.cols(); ++c) ytr(i, c) = emb.Y(i, c);
        for (std::size_t i = 0; i < test.n(); ++i)
            for (std::size_t c = 0; c < emb.Y.cols(); ++c) yte(i, c) = emb.Y(train.n() + i, c);
        return {std::move(ytr), std::move(yte)};
    }

    // out-of-sample: fit on train only
    if (spec.dr_method == "pca") {
        const auto [proj, emb] = pca_fit(train.X, spec.L);
        return {emb.Y, pca_transform(proj, test.X)};
    }
    if (spec.dr_method == "autoencoder") {
        const auto ae_spec =
            default_autoencoder_spec(static_cast<int>(train.m()), spec.L);
        TrainConfig cfg;
        cfg.learning_rate = spec.ae_learning_rate;
        cfg.batch_size = spec.ae_batch_size;
        cfg.epochs = spec.ae_epochs;
        cfg.seed = spec.seed;
        const auto [params, trace] = train_autoencoder(train.X, ae_spec, cfg);
        return {encode(params, ae_spec, train.X).Y, encode(params, ae_spec, test.X).Y};
    }
    const Embedding emb = run_dr(train.X, spec);
    const int k = std::min<int>(spec.neighbors, static_cast<int>(train.n()));
    Matrix yte(test.n(), emb.Y.cols());
#pragma omp parallel for schedule(dynamic, 8)
    for (long long qq = 0; qq < static_cast<long long>(test.n()); ++qq) {
        const auto q = static_cast<std::size_t>(qq);
        std::vector<std::pair<double, int>> dist(train.n());
        for (std::size_t i = 0; i < train.n(); ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < train.m(); ++c) {
                const double d = test.X(q, c) - train.X(i, c);
                s += d * d;
            }
            dist[i] = {s, static_cast<int>(i)};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::vector<int> nbr(k);
        for (int i = 0; i < k; ++i) nbr[i] = dist[i].second;
        const auto w = barycentric_weights(test.X.row(q), train.X, nbr);
        for (int i = 0; i < k; ++i)
            for (std::size_t c = 0; c < emb.Y.cols(); ++c)
                yte(q, c) += w[i] * emb.Y(static_cast<std::size_t>(nbr[i]), c);
    }
    return {emb.Y, std::move(yte)};
}

namespace {

std::vector<std::string> labels_of(const FeatureTable& t) {
    std::vector<std::string> out(t.n());
    for (std::size_t i = 0; i < t.n(); ++i) out[i] = t.rows[i].label;
    return out;
}

std::vector<std::string> classify_with(const FeatureTable& train_emb,
                                       const FeatureTable& test_emb,
                                       const PipelineSpec& spec, double hyper) {
    if (spec.classifier == "knn") {
        KnnConfig cfg;
        cfg.k = std::min<int>(static_cast<int>(hyper), static_cast<int>(train_emb.n()));
        cfg.metric = Metric::euclidean;
        return knn_classify(train_emb, test_emb, cfg);
    }
    if (spec.classifier == "lr") {
        const auto model = softmax_train(train_emb, hyper, spec.seed);
        return softmax_predict(model, test_emb).first;
    }
    if (spec.classifier == "svm-linear" || spec.classifier == "svm-rbf") {
        SvmKernel kernel;
        kernel.type = spec.classifier == "svm-rbf" ? SvmKernel::Type::rbf
                                                   : SvmKernel::Type::linear;
        const auto model = svm_train(train_emb, kernel, hyper);
        return svm_predict(model, test_emb).first;
    }
    throw UserError("unknown classifier: " + spec.classifier);
}

}  // namespace

double grid_search(const FeatureTable& train, const PipelineSpec& spec, int inner_folds) {
    std::vector<double> grid;
    if (spec.classifier == "knn")
        for (int k : spec.knn_grid_or_default()) grid.push_back(k);
    else
        grid = spec.c_grid_or_default();
    if (grid.empty()) throw UserError("grid_search: empty grid");
    if (grid.size() == 1) return grid.front();

    // speaker-grouped inner folds when there are enough speakers
    std::set<std::string> speakers;
    for (const auto& u : train.rows) speakers.insert(u.speaker_id);
    const int folds = std::min<int>(inner_folds, static_cast<int>(train.n()));
    std::vector<int> fold_of(train.n());
    if (static_cast<int>(speakers.size()) >= folds) {
        std::map<std::string, int> speaker_fold;
        int idx = 0;
        for (const auto& s : speakers) speaker_fold[s] = idx++ % folds;
        for (std::size_t i = 0; i < train.n(); ++i)
            fold_of[i] = speaker_fold[train.rows[i].speaker_id];
    } else {
        for (std::size_t i = 0; i < train.n(); ++i)
            fold_of[i] = static_cast<int>(i) % folds;
    }

    std::vector<double> ua_sum(grid.size(), 0.0);
    std::vector<int> ua_count(grid.size(), 0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> tr_idx, va_idx;
        for (std::size_t i = 0; i < train.n(); ++i)
            (fold_of[i] == f ? va_idx : tr_idx).push_back(static_cast<int>(i));
        if (tr_idx.empty() || va_idx.empty()) continue;
        const auto tr = subset_rows(train, tr_idx);
        const auto va = subset_rows(train, va_idx);
        std::set<std::string> tr_labels;
        for (const auto& u : tr.rows) tr_labels.insert(u.label);
        if (tr_labels.size() < 2) continue;
        const auto [trn, van, stats] = zscore_fit_apply(tr, va);
        const auto [ytr, yva] = embed_split(trn, van, spec);
        const auto tr_emb = with_features(trn, ytr);
        const auto va_emb = with_features(van, yva);
        const auto truth = labels_of(va);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto pred = classify_with(tr_emb, va_emb, spec, grid[g]);
            const auto [cm, wa, ua] = confusion_and_accuracies(truth, pred);
            ua_sum[g] += ua;
            ++ua_count[g];
        }
    }
    std::size_t best = 0;
    double best_ua = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double mean_ua = ua_count[g] > 0 ? ua_sum[g] / ua_count[g] : 0.0;
        if (mean_ua > best_ua + 1e-12) {
            best_ua = mean_ua;
            best = g;
        }
    }
    return grid[best];
}

EvalReport cross_validate(const FeatureTable& data, const FoldPlan& plan,
                          const PipelineSpec& spec) {
    EvalReport report;
    report.scheme = plan.scheme == CvScheme::lospo ? "lospo" : "loso";
    report.method = spec.dr_method;
    report.mode =
        spec.mode == PipelineSpec::Mode::transductive ? "transductive" : "oos_barycentric";
    report.classifier = spec.classifier;
    report.L = spec.L;

    std::vector<std::string> pooled_truth, pooled_pred;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto& [tr_idx, te_idx] = plan.folds[f];
        for (int i : tr_idx)
            if (i < 0 || static_cast<std::size_t>(i) >= data.n())
                throw UserError("cross_validate: fold index out of range");
        try {
            const auto train = subset_rows(data, tr_idx);
            const auto test = subset_rows(data, te_idx);
            const double hyper = grid_search(train, spec);
            const auto [trn, ten, stats] = zscore_fit_apply(train, test);
            const auto [ytr, yte] = embed_split(trn, ten, spec);
            const auto pred = classify_with(with_features(trn, ytr), with_features(ten, yte),
                                            spec, hyper);
            const auto truth = labels_of(test);
            const auto [cm, wa, ua] = confusion_and_accuracies(truth, pred);
            report.per_fold.push_back({static_cast<int>(f), hyper, wa, ua});
            pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
            pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
        } catch (const NumericError& e) {
            throw NumericError("fold " + std::to_string(f) + ": " + e.what());
        } catch (const UserError& e) {
            throw UserError("fold " + std::to_string(f) + ": " + e.what());
        }
    }
    auto [cm, wa, ua] = confusion_and_accuracies(pooled_truth, pooled_pred);
    report.confusion = std::move(cm);
    report.wa = wa;
    report.ua = ua;
    return report;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["scheme"] = report.scheme;
    j["method"] = report.method;
    j["L"] = report.L;
    j["mode"] = report.mode;
    j["classifier"] = report.classifier;
    j["per_fold"] = nlohmann::json::array();
    for (const auto& fr : report.per_fold)
        j["per_fold"].push_back(
            {{"fold", fr.fold}, {"k_or_C", fr.hyper}, {"WA", fr.wa}, {"UA", fr.ua}});
    j["aggregate"] = {{"WA", report.wa}, {"UA", report.ua}};
    const std::size_t k = report.confusion.classes.size();
    nlohmann::json conf = nlohmann::json::array();
    for (std::size_t r = 0; r < k; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < k; ++c) row.push_back(report.confusion.at(r, c));
        conf.push_back(row);
    }
    j["confusion"] = conf;
    j["class_names"] = report.confusion.classes;
    return j.dump(2);
}

}  // namespace ser
