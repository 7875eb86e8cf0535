#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ser/dr_spectral.hpp"
#include "ser/matrix.hpp"

namespace ser {

struct MlpSpec {
    // Full width chain: input m, encoder widths, latent L, decoder widths,
    // output m. The latent layer is the middle entry.
    std::vector<int> layer_widths;
    enum class Activation { relu, linear } activation = Activation::relu;

    std::size_t num_layers() const { return layer_widths.size() - 1; }
    std::size_t latent_index() const { return layer_widths.size() / 2; }
    int latent_dim() const { return layer_widths[latent_index()]; }
};

// Symmetric 7-width chain (m, a, b, L, b, a, m) with geometric interpolation:
// 3 encoder layers, the latent layer, 3 decoder layers.
MlpSpec default_autoencoder_spec(int m, int L,
                                 MlpSpec::Activation act = MlpSpec::Activation::relu);

void validate_spec(const MlpSpec& spec);

struct MlpParams {
    std::vector<Matrix> W;               // W[l]: widths[l+1] x widths[l]
    std::vector<std::vector<double>> b;  // b[l]: widths[l+1]
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 200;
    unsigned seed = 42;
    enum class Optimizer { sgd, adam } optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

// Glorot-uniform weights, zero biases; deterministic per seed.
MlpParams init_mlp(const MlpSpec& spec, unsigned seed);

// Forward pass through every layer (activation on all but the last).
Matrix mlp_forward(const MlpParams& params, const MlpSpec& spec, const Matrix& x);

// Mean squared reconstruction error per sample-dimension.
double reconstruction_mse(const MlpParams& params, const MlpSpec& spec, const Matrix& x);

// Gradient of the mean squared reconstruction error over a batch.
std::pair<std::vector<Matrix>, std::vector<std::vector<double>>> mlp_gradient(
    const MlpParams& params, const MlpSpec& spec, const Matrix& batch);

std::pair<MlpParams, std::vector<double>> train_autoencoder(const Matrix& x,
                                                            const MlpSpec& spec,
                                                            const TrainConfig& cfg);

// Forward through the encoder half only.
Embedding encode(const MlpParams& params, const MlpSpec& spec, const Matrix& x);

// Versioned JSON checkpoint; load/save round-trip is exact.
void save_checkpoint(const MlpParams& params, const MlpSpec& spec, const std::string& path);
std::pair<MlpParams, MlpSpec> load_checkpoint(const std::string& path);

}  // namespace ser
