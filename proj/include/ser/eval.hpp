#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ser/classify.hpp"
#include "ser/dataio.hpp"
#include "ser/dr_spectral.hpp"
#include "ser/numerics.hpp"

namespace ser {

struct NormStats {
    std::vector<double> mu, sigma;
};

// Z-normalization with train-only statistics; zero-variance columns keep
// sigma = 1 so they pass through as x - mu.
std::tuple<FeatureTable, FeatureTable, NormStats> zscore_fit_apply(const FeatureTable& train,
                                                                   const FeatureTable& test);

enum class CvScheme { lospo, loso };

CvScheme parse_scheme(const std::string& name);

struct FoldPlan {
    CvScheme scheme = CvScheme::lospo;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> folds;  // (train, test)
};

// One fold per distinct speaker (LOSpO) or session (LOSO), ordered by key.
FoldPlan make_folds(const std::vector<Utterance>& rows, CvScheme scheme);

struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<long long> counts;  // classes x classes, rows = truth

    long long at(std::size_t truth, std::size_t pred) const {
        return counts[truth * classes.size() + pred];
    }
};

// Returns (confusion, weighted accuracy, unweighted accuracy).
std::tuple<ConfusionMatrix, double, double> confusion_and_accuracies(
    const std::vector<std::string>& truth, const std::vector<std::string>& pred);

struct PipelineSpec {
    std::string dr_method = "pca";  // pca cmds smacof psmds nonmetric isomap lle mlle
                                    // spectral autoencoder none
    int L = 10;
    int neighbors = 10;
    unsigned seed = 42;
    Metric metric = Metric::euclidean;
    std::string classifier = "knn";  // knn lr svm-linear svm-rbf
    std::vector<int> knn_grid;       // defaults to 1..30
    std::vector<double> c_grid;      // defaults to log-spaced in [0.01, 10]
    enum class Mode { transductive, oos_barycentric } mode = Mode::transductive;
    int mds_max_iter = 300;
    double mds_rel_tol = 1e-6;
    int ae_epochs = 200;
    double ae_learning_rate = 1e-3;
    int ae_batch_size = 32;

    std::vector<int> knn_grid_or_default() const;
    std::vector<double> c_grid_or_default() const;
};

// Unsupervised DR fitted on all given rows (transductive use).
Embedding run_dr(const Matrix& x, const PipelineSpec& spec);

// Embeds train and test per spec.mode. Transductive fits on the stacked
// features; oos_barycentric fits on train only and maps test points through
// reconstruction weights over their nearest training rows (parametric methods
// use their native transform).
std::pair<Matrix, Matrix> embed_split(const FeatureTable& train, const FeatureTable& test,
                                      const PipelineSpec& spec);

// Best hyperparameter (k for knn, C otherwise) by mean inner-CV unweighted
// accuracy on training data only; ties prefer the smaller value.
double grid_search(const FeatureTable& train, const PipelineSpec& spec, int inner_folds = 3);

struct FoldResult {
    int fold = 0;
    double hyper = 0.0;
    double wa = 0.0, ua = 0.0;
};

struct EvalReport {
    std::string scheme, method, mode, classifier;
    int L = 0;
    std::vector<FoldResult> per_fold;
    double wa = 0.0, ua = 0.0;
    ConfusionMatrix confusion;
};

EvalReport cross_validate(const FeatureTable& data, const FoldPlan& plan,
                          const PipelineSpec& spec);

std::string report_to_json(const EvalReport& report);

}  // namespace ser
