#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ser/dataio.hpp"
#include "ser/matrix.hpp"
#include "ser/numerics.hpp"

namespace ser {

struct KnnConfig {
    int k = 1;
    Metric metric = Metric::euclidean;
};

// Majority vote among the k nearest training rows. Distance ties break toward
// the smaller index; vote ties by larger summed inverse distance, then by
// lexicographically smaller class name.
std::vector<std::string> knn_classify(const FeatureTable& train, const FeatureTable& test,
                                      const KnnConfig& cfg);

struct SoftmaxModel {
    Matrix W;                // classes x m
    std::vector<double> b;   // classes
    double C = 1.0;
    std::vector<std::string> classes;  // sorted
};

// Full-batch gradient descent with backtracking line search on the
// L2-regularized multinomial cross-entropy.
SoftmaxModel softmax_train(const FeatureTable& train, double C, unsigned seed = 0);

std::pair<std::vector<std::string>, Matrix> softmax_predict(const SoftmaxModel& model,
                                                            const FeatureTable& x);

struct SvmKernel {
    enum class Type { linear, rbf } type = Type::linear;
    double gamma = 0.0;  // rbf only; <= 0 selects 1 / (m * var(X))
};

struct BinarySvm {
    Matrix support_vectors;
    std::vector<double> coef;  // alpha_i * y_i
    double bias = 0.0;
};

struct SvmModel {
    std::vector<BinarySvm> ovr;  // one per class, class order = classes
    std::vector<std::string> classes;
    SvmKernel kernel;
    double C = 1.0;
};

// One-vs-rest SMO to KKT tolerance 1e-3.
SvmModel svm_train(const FeatureTable& train, SvmKernel kernel, double C);

std::pair<std::vector<std::string>, Matrix> svm_predict(const SvmModel& model,
                                                        const FeatureTable& x);

// Exposed for the dual-feasibility checks: per-class alpha * y values.
struct SmoSolution {
    std::vector<double> alpha;
    std::vector<double> y;  // +1 / -1
    double bias = 0.0;
};
SmoSolution smo_solve(const Matrix& x, const std::vector<double>& y, const SvmKernel& kernel,
                      double C, double tol = 1e-3);

}  // namespace ser
