#pragma once

#include <span>
#include <vector>

#include "nlc/matrix.hpp"

namespace nlc {

// Every probability is floored at this value before a logarithm. The same
// floor keeps softmax outputs strictly positive.
inline constexpr double kProbFloor = 1e-12;

// Per-example losses of one twin-network batch. sup[i] is the summed
// cross-entropy of both networks, agr[i] the symmetric KL between their
// predictions, and joint[i] = (1-lambda)*sup[i] + lambda*agr[i].
struct PerExampleLosses {
    std::vector<double> sup;
    std::vector<double> agr;
    std::vector<double> joint;
    double lambda_used = 0.0;
};

// Gradients of the mean joint loss over the selected rows, w.r.t. each
// network's pre-softmax logits. Deselected rows are zero.
struct LogitGrads {
    Matrix net1;
    Matrix net2;
};

double cross_entropy(std::span<const double> p, int y);

double kl_div(std::span<const double> p, std::span<const double> q);

// Symmetric KL: kl_div(p1, p2) + kl_div(p2, p1).
double agreement_loss(std::span<const double> p1, std::span<const double> p2);

PerExampleLosses joint_losses(const Matrix& p1, const Matrix& p2,
                              const std::vector<int>& labels, double lambda);

LogitGrads joint_loss_grad(const Matrix& p1, const Matrix& p2,
                           const std::vector<int>& labels, double lambda,
                           const std::vector<bool>& selection_mask);

}  // namespace nlc
