#include "nlc/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlc/errors.hpp"
#include "nlc/losses.hpp"
#include "nlc/rng.hpp"

namespace nlc {

namespace {

// out[BxN] = a[BxK] * b[KxN]
Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out_row = out.data() + i * out.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* b_row = b.data() + k * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

// out[KxN] = a^T[KxB] * b[BxN], a given as [BxK]
Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    Matrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* a_row = a.data() + i * a.cols();
        const double* b_row = b.data() + i * b.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a_row[k];
            double* out_row = out.data() + k * out.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

// out[BxK] = a[BxN] * b^T[NxK], b given as [KxN]
Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* a_row = a.data() + i * a.cols();
        for (std::size_t k = 0; k < b.rows(); ++k) {
            const double* b_row = b.data() + k * b.cols();
            double acc = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) acc += a_row[j] * b_row[j];
            out(i, k) = acc;
        }
    }
    return out;
}

void softmax_rows_inplace(Matrix& z) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        const double zmax = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - zmax);
            sum += v;
        }
        for (double& v : row) v = std::max(v / sum, kProbFloor);
    }
}

}  // namespace

std::size_t NetParams::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

NetParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2)
        throw ConfigError("layer_dims needs an input and an output layer");
    for (std::size_t d : layer_dims)
        if (d == 0) throw ConfigError("layer_dims entries must be positive");

    NetParams p;
    p.layer_dims = layer_dims;
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const std::size_t fan_in = layer_dims[l];
        const std::size_t fan_out = layer_dims[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix w(fan_in, fan_out);
        for (double& v : w.storage()) v = scale * gauss(rng);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

AdamState make_adam_state(const NetParams& params) {
    AdamState s;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        s.m_weights.emplace_back(params.weights[l].rows(), params.weights[l].cols());
        s.v_weights.emplace_back(params.weights[l].rows(), params.weights[l].cols());
        s.m_biases.emplace_back(params.biases[l].size(), 0.0);
        s.v_biases.emplace_back(params.biases[l].size(), 0.0);
    }
    return s;
}

Matrix forward(const NetParams& params, const Matrix& features, ForwardCache* cache) {
    if (features.cols() != params.input_dim())
        throw DimensionError("feature width " + std::to_string(features.cols()) +
                             " does not match input dim " + std::to_string(params.input_dim()));
    if (cache) {
        cache->input = features;
        cache->pre.clear();
        cache->act.clear();
    }

    Matrix act = features;
    const std::size_t layers = params.num_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix z = matmul(act, params.weights[l]);
        for (std::size_t i = 0; i < z.rows(); ++i) {
            auto row = z.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += params.biases[l][j];
        }
        if (cache) cache->pre.push_back(z);
        if (l + 1 < layers) {
            for (double& v : z.storage()) v = std::tanh(v);
        } else {
            softmax_rows_inplace(z);
        }
        if (cache) cache->act.push_back(z);
        act = std::move(z);
    }
    return act;
}

NetGrads backprop(const NetParams& params, const ForwardCache& cache,
                  const Matrix& dloss_dlogits) {
    const std::size_t layers = params.num_layers();
    if (cache.pre.size() != layers || cache.act.size() != layers)
        throw DimensionError("cache does not match network depth");
    if (dloss_dlogits.rows() != cache.input.rows() ||
        dloss_dlogits.cols() != params.num_classes())
        throw DimensionError("dloss_dlogits shape does not match batch and class count");

    NetGrads g;
    g.weights.resize(layers);
    g.biases.resize(layers);

    Matrix delta = dloss_dlogits;
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& in_act = (l == 0) ? cache.input : cache.act[l - 1];
        g.weights[l] = matmul_at_b(in_act, delta);
        g.biases[l].assign(delta.cols(), 0.0);
        for (std::size_t i = 0; i < delta.rows(); ++i)
            for (std::size_t j = 0; j < delta.cols(); ++j) g.biases[l][j] += delta(i, j);
        if (l > 0) {
            Matrix prev = matmul_a_bt(delta, params.weights[l]);
            // tanh'(z) = 1 - tanh(z)^2, with tanh(z) already cached
            const Matrix& a = cache.act[l - 1];
            for (std::size_t i = 0; i < prev.size(); ++i)
                prev.storage()[i] *= 1.0 - a.storage()[i] * a.storage()[i];
            delta = std::move(prev);
        }
    }
    return g;
}

void adam_step(NetParams& params, const NetGrads& grads, AdamState& state, double lr) {
    const std::size_t layers = params.num_layers();
    if (grads.weights.size() != layers || grads.biases.size() != layers)
        throw DimensionError("gradient layer count does not match parameters");

    for (std::size_t l = 0; l < layers; ++l) {
        if (!grads.weights[l].same_shape(params.weights[l]) ||
            grads.biases[l].size() != params.biases[l].size())
            throw DimensionError("gradient shape mismatch in layer " + std::to_string(l));
        for (double v : grads.weights[l].storage())
            if (!std::isfinite(v))
                throw NumericError("non-finite weight gradient in layer " + std::to_string(l));
        for (double v : grads.biases[l])
            if (!std::isfinite(v))
                throw NumericError("non-finite bias gradient in layer " + std::to_string(l));
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](double& p, double g, double& m, double& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        p -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    };

    for (std::size_t l = 0; l < layers; ++l) {
        auto& w = params.weights[l].storage();
        const auto& gw = grads.weights[l].storage();
        auto& mw = state.m_weights[l].storage();
        auto& vw = state.v_weights[l].storage();
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);

        auto& b = params.biases[l];
        const auto& gb = grads.biases[l];
        auto& mb = state.m_biases[l];
        auto& vb = state.v_biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
    }
}

}  // namespace nlc
