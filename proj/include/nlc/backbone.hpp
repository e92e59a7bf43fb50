#pragma once

#include <cstdint>
#include <vector>

#include "nlc/matrix.hpp"

namespace nlc {

// Fully-connected multi-class classifier: tanh hidden layers, softmax
// output. Kept deliberately small and explicit — forward, backprop and the
// Adam update are all hand-written so every gradient path is checkable
// against finite differences.

struct NetParams {
    std::vector<std::size_t> layer_dims;          // input dim, hidden widths..., classes
    std::vector<Matrix> weights;                  // weights[l]: [dims[l] x dims[l+1]]
    std::vector<std::vector<double>> biases;      // biases[l]: [dims[l+1]]

    std::size_t num_layers() const { return weights.size(); }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t num_classes() const { return layer_dims.back(); }
    std::size_t num_params() const;
};

// Gradients shaped like NetParams.
struct NetGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

// Per-layer pre-activations and activations for one mini-batch.
struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;   // z[l] = act[l-1] * W[l] + b[l]
    std::vector<Matrix> act;   // act[l] = tanh(z[l]); act.back() = softmax rows
};

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Zero biases, weights ~ N(0, 1/fan_in), seeded. Distinct seeds give
// distinct parameter sets; the same seed reproduces them exactly.
NetParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

AdamState make_adam_state(const NetParams& params);

// Runs the batch through the network and returns row-wise class
// probabilities. Each softmax entry is floored at kProbFloor, so rows sum to
// 1 within 1e-6 and every entry stays strictly positive. Pass a cache when
// backprop will follow.
Matrix forward(const NetParams& params, const Matrix& features, ForwardCache* cache = nullptr);

// Chain rule through the MLP given the gradient of a scalar loss w.r.t. the
// final-layer logits. Gradients are summed over the batch; any averaging is
// the caller's business.
NetGrads backprop(const NetParams& params, const ForwardCache& cache,
                  const Matrix& dloss_dlogits);

// Standard bias-corrected Adam update, in place. Throws NumericError naming
// the layer if a gradient entry is not finite.
void adam_step(NetParams& params, const NetGrads& grads, AdamState& state, double lr);

}  // namespace nlc
