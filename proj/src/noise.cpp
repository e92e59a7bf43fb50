#include "nlc/noise.hpp"

#include <cstdio>
#include <ostream>
#include <random>
#include <set>
#include <string>

#include "nlc/errors.hpp"
#include "nlc/rng.hpp"

namespace nlc {

namespace {

void check_tau(double tau) {
    if (tau < 0.0 || tau > 1.0)
        throw ConfigError("tau " + std::to_string(tau) + " out of [0,1]");
}

Matrix identity(std::size_t n) {
    Matrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
    return q;
}

}  // namespace

TransitionMatrix symmetric_q(std::size_t num_classes, double tau) {
    if (num_classes < 2) throw ConfigError("symmetric noise needs at least 2 classes");
    check_tau(tau);
    Matrix q(num_classes, num_classes, tau / static_cast<double>(num_classes - 1));
    for (std::size_t i = 0; i < num_classes; ++i) q(i, i) = 1.0 - tau;
    return {q, tau};
}

TransitionMatrix pairmap_q(std::size_t num_classes,
                           const std::vector<std::pair<int, int>>& pairs, double tau) {
    if (num_classes < 2) throw ConfigError("pair-mapping noise needs at least 2 classes");
    check_tau(tau);
    std::set<int> sources;
    for (const auto& [src, dst] : pairs) {
        if (src < 0 || static_cast<std::size_t>(src) >= num_classes || dst < 0 ||
            static_cast<std::size_t>(dst) >= num_classes)
            throw ConfigError("pair (" + std::to_string(src) + "," + std::to_string(dst) +
                              ") out of class range");
        if (!sources.insert(src).second)
            throw ConfigError("duplicate source class " + std::to_string(src) + " in pair map");
    }
    Matrix q = identity(num_classes);
    for (const auto& [src, dst] : pairs) {
        const auto s = static_cast<std::size_t>(src);
        q(s, s) = 1.0 - tau;
        q(s, static_cast<std::size_t>(dst)) += tau;
    }
    return {q, tau};
}

TransitionMatrix circular_q(std::size_t num_classes, std::size_t superclass_size, double tau) {
    if (num_classes < 2) throw ConfigError("circular noise needs at least 2 classes");
    if (superclass_size == 0 || num_classes % superclass_size != 0)
        throw ConfigError("superclass size " + std::to_string(superclass_size) +
                          " does not divide " + std::to_string(num_classes) + " classes");
    check_tau(tau);
    Matrix q(num_classes, num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) {
        const std::size_t block = (i / superclass_size) * superclass_size;
        const std::size_t next = block + (i - block + 1) % superclass_size;
        q(i, i) = 1.0 - tau;
        q(i, next) += tau;
    }
    return {q, tau};
}

std::vector<int> apply_noise(const std::vector<int>& clean_labels, const TransitionMatrix& q,
                             std::uint64_t seed) {
    const std::size_t classes = q.num_classes();
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> noisy(clean_labels.size());
    for (std::size_t i = 0; i < clean_labels.size(); ++i) {
        const int y = clean_labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw IndexError("label " + std::to_string(y) + " out of range [0, " +
                             std::to_string(classes) + ")");
        const double u = unit(rng);
        double cdf = 0.0;
        std::size_t pick = classes - 1;
        for (std::size_t j = 0; j < classes; ++j) {
            cdf += q.q(static_cast<std::size_t>(y), j);
            if (u < cdf) {
                pick = j;
                break;
            }
        }
        noisy[i] = static_cast<int>(pick);
    }
    return noisy;
}

double empirical_flip_rate(const std::vector<int>& clean, const std::vector<int>& noisy) {
    if (clean.size() != noisy.size())
        throw DimensionError("label vectors have different lengths");
    if (clean.empty()) return 0.0;
    std::size_t flips = 0;
    for (std::size_t i = 0; i < clean.size(); ++i)
        if (clean[i] != noisy[i]) ++flips;
    return static_cast<double>(flips) / static_cast<double>(clean.size());
}

void write_csv(const TransitionMatrix& q, std::ostream& os) {
    char buf[32];
    for (std::size_t i = 0; i < q.q.rows(); ++i) {
        for (std::size_t j = 0; j < q.q.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", q.q(i, j));
            if (j) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace nlc
