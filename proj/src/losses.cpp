#include "nlc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlc/errors.hpp"

namespace nlc {

namespace {

inline double floored(double p) { return std::max(p, kProbFloor); }

}  // namespace

double cross_entropy(std::span<const double> p, int y) {
    if (y < 0 || static_cast<std::size_t>(y) >= p.size())
        throw IndexError("class index " + std::to_string(y) + " out of range [0, " +
                         std::to_string(p.size()) + ")");
    return -std::log(floored(p[static_cast<std::size_t>(y)]));
}

double kl_div(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw DimensionError("kl_div operands have different lengths");
    double sum = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c)
        sum += p[c] * std::log(floored(p[c]) / floored(q[c]));
    // flooring can push the sum a hair below zero
    return std::max(sum, 0.0);
}

double agreement_loss(std::span<const double> p1, std::span<const double> p2) {
    return kl_div(p1, p2) + kl_div(p2, p1);
}

PerExampleLosses joint_losses(const Matrix& p1, const Matrix& p2,
                              const std::vector<int>& labels, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("lambda " + std::to_string(lambda) + " out of [0,1]");
    if (!p1.same_shape(p2))
        throw DimensionError("network outputs have different shapes");
    if (labels.size() != p1.rows())
        throw DimensionError("label count does not match batch size");

    const std::size_t batch = p1.rows();
    PerExampleLosses out;
    out.lambda_used = lambda;
    out.sup.resize(batch);
    out.agr.resize(batch);
    out.joint.resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        out.sup[i] = cross_entropy(p1.row(i), labels[i]) + cross_entropy(p2.row(i), labels[i]);
        out.agr[i] = agreement_loss(p1.row(i), p2.row(i));
        out.joint[i] = (1.0 - lambda) * out.sup[i] + lambda * out.agr[i];
    }
    return out;
}

LogitGrads joint_loss_grad(const Matrix& p1, const Matrix& p2,
                           const std::vector<int>& labels, double lambda,
                           const std::vector<bool>& selection_mask) {
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("lambda " + std::to_string(lambda) + " out of [0,1]");
    if (!p1.same_shape(p2))
        throw DimensionError("network outputs have different shapes");
    if (labels.size() != p1.rows() || selection_mask.size() != p1.rows())
        throw DimensionError("labels/mask length does not match batch size");

    const std::size_t selected =
        static_cast<std::size_t>(std::count(selection_mask.begin(), selection_mask.end(), true));
    if (selected == 0) throw ConfigError("selection mask is all false; nothing to train on");

    const std::size_t batch = p1.rows();
    const std::size_t classes = p1.cols();
    LogitGrads g{Matrix(batch, classes), Matrix(batch, classes)};
    const double inv_n = 1.0 / static_cast<double>(selected);

    for (std::size_t i = 0; i < batch; ++i) {
        if (!selection_mask[i]) continue;
        const auto r1 = p1.row(i);
        const auto r2 = p2.row(i);
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw IndexError("class index " + std::to_string(y) + " out of range");
        const double kl12 = kl_div(r1, r2);
        const double kl21 = kl_div(r2, r1);
        for (std::size_t j = 0; j < classes; ++j) {
            const double onehot = (static_cast<std::size_t>(y) == j) ? 1.0 : 0.0;
            const double log_ratio = std::log(std::max(r1[j], kProbFloor) /
                                              std::max(r2[j], kProbFloor));
            const double agr1 = r1[j] * (log_ratio - kl12) + (r1[j] - r2[j]);
            const double agr2 = r2[j] * (-log_ratio - kl21) + (r2[j] - r1[j]);
            g.net1(i, j) = inv_n * ((1.0 - lambda) * (r1[j] - onehot) + lambda * agr1);
            g.net2(i, j) = inv_n * ((1.0 - lambda) * (r2[j] - onehot) + lambda * agr2);
        }
    }
    return g;
}

}  // namespace nlc
