#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "nlc/matrix.hpp"

namespace nlc {

// Row-stochastic label-flip matrix: q(i, j) is the probability that clean
// class i is observed as label j.
struct TransitionMatrix {
    Matrix q;
    double tau = 0.0;  // nominal noise rate the matrix was built with

    std::size_t num_classes() const { return q.rows(); }
};

// Uniform noise: diagonal 1-tau, off-diagonal tau/(C-1).
TransitionMatrix symmetric_q(std::size_t num_classes, double tau);

// Directed class-to-class flips: each (source, target) pair sends tau of the
// source's mass to the target; unlisted classes keep their label.
TransitionMatrix pairmap_q(std::size_t num_classes,
                           const std::vector<std::pair<int, int>>& pairs, double tau);

// Classes partitioned into contiguous blocks of superclass_size; each class
// flips to the next one within its block (wrapping) with probability tau.
TransitionMatrix circular_q(std::size_t num_classes, std::size_t superclass_size, double tau);

// Samples each noisy label independently from its transition row.
std::vector<int> apply_noise(const std::vector<int>& clean_labels, const TransitionMatrix& q,
                             std::uint64_t seed);

// Fraction of positions where the two label vectors differ.
double empirical_flip_rate(const std::vector<int>& clean, const std::vector<int>& noisy);

// Plain-text audit dump: one row per line, C comma-separated reals.
void write_csv(const TransitionMatrix& q, std::ostream& os);

}  // namespace nlc
