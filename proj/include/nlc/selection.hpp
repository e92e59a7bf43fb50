#pragma once

#include <cstddef>
#include <vector>

namespace nlc {

// Scheduling hyperparameters for selection, correction and lambda decay.
struct Schedules {
    double tau0 = 0.5;          // initial noise-rate estimate
    int t_k = 10;               // epochs over which the keep rate ramps down
    double lambda_start = 0.9;  // agreement weight at the start
    double lambda_end = 0.7;    // agreement weight floor
    int t_update = 10;          // label update interval in epochs
    double c_restart = 0.05;    // correction rate above which training restarts
};

// Result of one label-correction pass over the training set.
struct CorrectionOutcome {
    std::vector<int> correction_set;  // eligible indices (confident ∩ noisy), sorted
    std::vector<int> changed;         // subset whose labels actually changed
    std::vector<int> new_labels;      // full label vector after the pass
    double new_tau = 0.0;             // noise estimate after the pass
    double rate_used = 0.0;           // correction rate C(k) used for the pass
};

// The three index sets of a correction pass before the agreement filter.
struct CorrectionSets {
    std::vector<int> confident;   // smallest agreement losses, ceil(rate*N)
    std::vector<int> noisy;       // largest supervised losses, floor(rate*N)
    std::vector<int> correction;  // their intersection
};

// Keep rate R(t) = 1 - min(t/t_k * tau, tau): starts at 1, ramps down, and
// clamps at 1 - tau from epoch t_k on.
double selection_rate(int t, int t_k, double tau_current);

// Marks the floor(rate*B) (at least 1) smallest losses. Ties break toward
// the lower index.
std::vector<bool> small_loss_select(const std::vector<double>& per_example_joint, double rate);

// C(k) = tau_prev / (2k) for the k-th correction, k >= 1.
double correction_rate(int k, double tau_prev);

CorrectionSets select_correction_set(const std::vector<double>& agr,
                                     const std::vector<double>& sup, double rate);

// Rewrites labels inside the correction set where both networks predict the
// same class and that class differs from the current label. new_tau and
// rate_used are left for the caller to fill.
CorrectionOutcome apply_correction(const std::vector<int>& current_labels,
                                   const std::vector<int>& correction,
                                   const std::vector<int>& pred1, const std::vector<int>& pred2);

// tau_k = tau_{k-1} - |correction set| / N, clamped to [0,1].
double update_tau(double tau_prev, std::size_t correction_set_size, std::size_t n);

}  // namespace nlc
