#include "nlc/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nlc/errors.hpp"

namespace nlc {

namespace {

// Indices of the n extreme values, ties broken by lower index. Comparator
// decides the direction.
template <typename Cmp>
std::vector<int> top_n_indices(std::size_t size, std::size_t n, Cmp cmp) {
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    if (n < size) std::nth_element(idx.begin(), idx.begin() + static_cast<long>(n), idx.end(), cmp);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

double selection_rate(int t, int t_k, double tau_current) {
    const double ramp = static_cast<double>(t) / static_cast<double>(t_k) * tau_current;
    return 1.0 - std::min(ramp, tau_current);
}

std::vector<bool> small_loss_select(const std::vector<double>& per_example_joint, double rate) {
    if (per_example_joint.empty()) throw ConfigError("cannot select from an empty batch");
    if (rate <= 0.0 || rate > 1.0)
        throw ConfigError("selection rate " + std::to_string(rate) + " out of (0,1]");

    const std::size_t batch = per_example_joint.size();
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(rate * static_cast<double>(batch))));

    auto kept = top_n_indices(batch, keep, [&](int a, int b) {
        const auto sa = static_cast<std::size_t>(a);
        const auto sb = static_cast<std::size_t>(b);
        if (per_example_joint[sa] != per_example_joint[sb])
            return per_example_joint[sa] < per_example_joint[sb];
        return a < b;
    });

    std::vector<bool> mask(batch, false);
    for (int i : kept) mask[static_cast<std::size_t>(i)] = true;
    return mask;
}

double correction_rate(int k, double tau_prev) {
    if (k < 1) throw ConfigError("correction counter must be >= 1");
    return tau_prev / (2.0 * static_cast<double>(k));
}

CorrectionSets select_correction_set(const std::vector<double>& agr,
                                     const std::vector<double>& sup, double rate) {
    if (agr.size() != sup.size())
        throw DimensionError("agreement and supervised loss vectors differ in length");
    if (rate < 0.0 || rate > 1.0)
        throw ConfigError("correction rate " + std::to_string(rate) + " out of [0,1]");

    const std::size_t n = agr.size();
    const auto n_confident =
        static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n)));
    const auto n_noisy = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));

    CorrectionSets sets;
    sets.confident = top_n_indices(n, std::min(n_confident, n), [&](int a, int b) {
        const auto sa = static_cast<std::size_t>(a);
        const auto sb = static_cast<std::size_t>(b);
        if (agr[sa] != agr[sb]) return agr[sa] < agr[sb];
        return a < b;
    });
    sets.noisy = top_n_indices(n, std::min(n_noisy, n), [&](int a, int b) {
        const auto sa = static_cast<std::size_t>(a);
        const auto sb = static_cast<std::size_t>(b);
        if (sup[sa] != sup[sb]) return sup[sa] > sup[sb];
        return a < b;
    });
    std::set_intersection(sets.confident.begin(), sets.confident.end(), sets.noisy.begin(),
                          sets.noisy.end(), std::back_inserter(sets.correction));
    return sets;
}

CorrectionOutcome apply_correction(const std::vector<int>& current_labels,
                                   const std::vector<int>& correction,
                                   const std::vector<int>& pred1,
                                   const std::vector<int>& pred2) {
    if (pred1.size() != current_labels.size() || pred2.size() != current_labels.size())
        throw DimensionError("prediction vectors do not match label count");

    CorrectionOutcome out;
    out.correction_set = correction;
    std::sort(out.correction_set.begin(), out.correction_set.end());
    out.new_labels = current_labels;
    for (int i : out.correction_set) {
        if (i < 0 || static_cast<std::size_t>(i) >= current_labels.size())
            throw IndexError("correction index " + std::to_string(i) + " out of range");
        const auto si = static_cast<std::size_t>(i);
        if (pred1[si] == pred2[si] && pred1[si] != out.new_labels[si]) {
            out.new_labels[si] = pred1[si];
            out.changed.push_back(i);
        }
    }
    return out;
}

double update_tau(double tau_prev, std::size_t correction_set_size, std::size_t n) {
    if (correction_set_size > n)
        throw ConfigError("correction set larger than the dataset");
    if (n == 0) return std::clamp(tau_prev, 0.0, 1.0);
    const double next =
        tau_prev - static_cast<double>(correction_set_size) / static_cast<double>(n);
    return std::clamp(next, 0.0, 1.0);
}

}  // namespace nlc
