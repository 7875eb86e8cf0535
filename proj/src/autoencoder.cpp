#include "ser/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ser/errors.hpp"

namespace ser {

namespace {

double activate(double z, MlpSpec::Activation act) {
    return act == MlpSpec::Activation::relu ? std::max(0.0, z) : z;
}

double activate_grad(double z, MlpSpec::Activation act) {
    return act == MlpSpec::Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

// Per-layer pre-activations for a batch; out[l] has shape batch x widths[l+1].
std::vector<Matrix> forward_preacts(const MlpParams& params, const MlpSpec& spec,
                                    const Matrix& x) {
    const std::size_t layers = spec.num_layers();
    std::vector<Matrix> z(layers);
    Matrix a = x;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& w = params.W[l];
        z[l] = Matrix(a.rows(), w.rows());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t r = 0; r < w.rows(); ++r) {
                double s = params.b[l][r];
                for (std::size_t c = 0; c < w.cols(); ++c) s += w(r, c) * a(i, c);
                z[l](i, r) = s;
            }
        if (l + 1 < layers) {
            a = z[l];
            for (auto& v : a.data()) v = activate(v, spec.activation);
        }
    }
    return z;
}

}  // namespace

MlpSpec default_autoencoder_spec(int m, int L, MlpSpec::Activation act) {
    if (m < 1 || L < 1 || L > m) throw UserError("autoencoder: need 1 <= L <= m");
    const double r = std::pow(static_cast<double>(L) / m, 1.0 / 3.0);
    auto width = [&](double f) {
        const int w = static_cast<int>(std::lround(m * f));
        return std::clamp(w, L, m);
    };
    const int a = width(r), b = width(r * r);
    MlpSpec spec;
    spec.layer_widths = {m, a, b, L, b, a, m};
    spec.activation = act;
    validate_spec(spec);
    return spec;
}

void validate_spec(const MlpSpec& spec) {
    const auto& w = spec.layer_widths;
    if (w.size() < 3 || w.size() % 2 == 0)
        throw UserError("mlp spec: width chain must have odd length >= 3");
    if (w.front() != w.back()) throw UserError("mlp spec: input and output widths must match");
    for (int v : w)
        if (v < 1) throw UserError("mlp spec: widths must be positive");
}

MlpParams init_mlp(const MlpSpec& spec, unsigned seed) {
    validate_spec(spec);
    std::mt19937 rng(seed);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(spec.layer_widths[l]);
        const auto fan_out = static_cast<std::size_t>(spec.layer_widths[l + 1]);
        const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-lim, lim);
        Matrix w(fan_out, fan_in);
        for (auto& v : w.data()) v = dist(rng);
        p.W.push_back(std::move(w));
        p.b.emplace_back(fan_out, 0.0);
    }
    return p;
}

Matrix mlp_forward(const MlpParams& params, const MlpSpec& spec, const Matrix& x) {
    if (x.cols() != static_cast<std::size_t>(spec.layer_widths.front()))
        throw UserError("mlp: input width mismatch");
    auto z = forward_preacts(params, spec, x);
    return std::move(z.back());
}

double reconstruction_mse(const MlpParams& params, const MlpSpec& spec, const Matrix& x) {
    const Matrix out = mlp_forward(params, spec, x);
    double s = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
        const double r = out.data()[i] - x.data()[i];
        s += r * r;
    }
    return s / static_cast<double>(x.data().size());
}

std::pair<std::vector<Matrix>, std::vector<std::vector<double>>> mlp_gradient(
    const MlpParams& params, const MlpSpec& spec, const Matrix& batch) {
    const std::size_t layers = spec.num_layers();
    const std::size_t bsz = batch.rows();
    const auto z = forward_preacts(params, spec, batch);

    // activations feeding each layer
    std::vector<Matrix> acts(layers);
    acts[0] = batch;
    for (std::size_t l = 1; l < layers; ++l) {
        acts[l] = z[l - 1];
        for (auto& v : acts[l].data()) v = activate(v, spec.activation);
    }

    std::vector<Matrix> gw(layers);
    std::vector<std::vector<double>> gb(layers);
    const double scale = 2.0 / static_cast<double>(batch.data().size());
    Matrix delta = z.back();  // output layer is linear
    for (std::size_t i = 0; i < delta.data().size(); ++i)
        delta.data()[i] = scale * (delta.data()[i] - batch.data()[i]);

    for (std::size_t l = layers; l-- > 0;) {
        const auto& w = params.W[l];
        gw[l] = Matrix(w.rows(), w.cols());
        gb[l].assign(w.rows(), 0.0);
        for (std::size_t i = 0; i < bsz; ++i)
            for (std::size_t r = 0; r < w.rows(); ++r) {
                const double dv = delta(i, r);
                gb[l][r] += dv;
                for (std::size_t c = 0; c < w.cols(); ++c) gw[l](r, c) += dv * acts[l](i, c);
            }
        if (l == 0) break;
        Matrix prev(bsz, w.cols());
        for (std::size_t i = 0; i < bsz; ++i)
            for (std::size_t c = 0; c < w.cols(); ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < w.rows(); ++r) s += delta(i, r) * w(r, c);
                prev(i, c) = s * activate_grad(z[l - 1](i, c), spec.activation);
            }
        delta = std::move(prev);
    }
    return {std::move(gw), std::move(gb)};
}

std::pair<MlpParams, std::vector<double>> train_autoencoder(const Matrix& x, const MlpSpec& spec,
                                                            const TrainConfig& cfg) {
    validate_spec(spec);
    if (x.cols() != static_cast<std::size_t>(spec.layer_widths.front()))
        throw UserError("train_autoencoder: data width does not match spec input width");
    if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1 || cfg.epochs < 0)
        throw UserError("train_autoencoder: bad config");

    MlpParams params = init_mlp(spec, cfg.seed);
    std::vector<double> trace;
    const std::size_t n = x.rows();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(cfg.seed + 1);

    // adam state
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    if (cfg.optimizer == TrainConfig::Optimizer::adam) {
        for (std::size_t l = 0; l < params.W.size(); ++l) {
            mw.emplace_back(params.W[l].rows(), params.W[l].cols());
            vw.emplace_back(params.W[l].rows(), params.W[l].cols());
            mb.emplace_back(params.b[l].size(), 0.0);
            vb.emplace_back(params.b[l].size(), 0.0);
        }
    }
    long long t = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sq_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, n - start);
            Matrix batch(bsz, x.cols());
            for (std::size_t i = 0; i < bsz; ++i)
                for (std::size_t c = 0; c < x.cols(); ++c)
                    batch(i, c) = x(static_cast<std::size_t>(order[start + i]), c);

            const Matrix out = mlp_forward(params, spec, batch);
            for (std::size_t i = 0; i < batch.data().size(); ++i) {
                const double r = out.data()[i] - batch.data()[i];
                sq_sum += r * r;
            }
            auto [gw, gb] = mlp_gradient(params, spec, batch);

            ++t;
            for (std::size_t l = 0; l < params.W.size(); ++l) {
                if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
                    for (std::size_t i = 0; i < params.W[l].data().size(); ++i)
                        params.W[l].data()[i] -= cfg.learning_rate * gw[l].data()[i];
                    for (std::size_t i = 0; i < params.b[l].size(); ++i)
                        params.b[l][i] -= cfg.learning_rate * gb[l][i];
                } else {
                    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
                    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
                    auto adam_update = [&](double& p, double& m, double& v, double g) {
                        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
                        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
                        p -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
                    };
                    for (std::size_t i = 0; i < params.W[l].data().size(); ++i)
                        adam_update(params.W[l].data()[i], mw[l].data()[i], vw[l].data()[i],
                                    gw[l].data()[i]);
                    for (std::size_t i = 0; i < params.b[l].size(); ++i)
                        adam_update(params.b[l][i], mb[l][i], vb[l][i], gb[l][i]);
                }
            }
        }
        const double epoch_loss = sq_sum / static_cast<double>(x.data().size());
        if (!std::isfinite(epoch_loss))
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch),
                                   epoch);
        trace.push_back(epoch_loss);
    }
    return {std::move(params), std::move(trace)};
}

Embedding encode(const MlpParams& params, const MlpSpec& spec, const Matrix& x) {
    if (x.cols() != static_cast<std::size_t>(spec.layer_widths.front()))
        throw UserError("encode: input width mismatch");
    const std::size_t half = spec.latent_index();
    Matrix a = x;
    for (std::size_t l = 0; l < half; ++l) {
        const auto& w = params.W[l];
        Matrix next(a.rows(), w.rows());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t r = 0; r < w.rows(); ++r) {
                double s = params.b[l][r];
                for (std::size_t c = 0; c < w.cols(); ++c) s += w(r, c) * a(i, c);
                next(i, r) = activate(s, spec.activation);
            }
        a = std::move(next);
    }
    const int L = spec.latent_dim();
    return {std::move(a), "autoencoder", L};
}

void save_checkpoint(const MlpParams& params, const MlpSpec& spec, const std::string& path) {
    nlohmann::json j;
    j["format"] = "mlp-checkpoint-v1";
    j["widths"] = spec.layer_widths;
    j["activation"] = spec.activation == MlpSpec::Activation::relu ? "relu" : "linear";
    for (std::size_t l = 0; l < params.W.size(); ++l) {
        j["weights"].push_back(params.W[l].data());
        j["biases"].push_back(params.b[l]);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump();
}

std::pair<MlpParams, MlpSpec> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad checkpoint JSON: " + std::string(e.what()));
    }
    if (j.value("format", "") != "mlp-checkpoint-v1")
        throw ParseError("unsupported checkpoint format");
    MlpSpec spec;
    spec.layer_widths = j.at("widths").get<std::vector<int>>();
    const std::string act = j.at("activation").get<std::string>();
    spec.activation = act == "relu" ? MlpSpec::Activation::relu : MlpSpec::Activation::linear;
    validate_spec(spec);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
        const auto rows = static_cast<std::size_t>(spec.layer_widths[l + 1]);
        const auto cols = static_cast<std::size_t>(spec.layer_widths[l]);
        Matrix w(rows, cols);
        w.data() = j.at("weights").at(l).get<std::vector<double>>();
        if (w.data().size() != rows * cols) throw ParseError("checkpoint weight shape mismatch");
        p.W.push_back(std::move(w));
        auto bias = j.at("biases").at(l).get<std::vector<double>>();
        if (bias.size() != rows) throw ParseError("checkpoint bias shape mismatch");
        p.b.push_back(std::move(bias));
    }
    return {std::move(p), std::move(spec)};
}

}  // namespace ser
