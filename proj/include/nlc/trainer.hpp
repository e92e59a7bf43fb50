#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlc/backbone.hpp"
#include "nlc/dataset.hpp"
#include "nlc/metrics.hpp"
#include "nlc/selection.hpp"

namespace nlc {

enum class Mode {
    method,
    standard_baseline,
    joint_only_baseline,
    continuous_update_ablation,
    no_retrain_ablation,
};

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct RunConfig {
    Schedules schedules;
    std::vector<std::size_t> layer_dims;  // input dim, hidden widths..., classes
    int stage1_epochs = 60;
    int finetune_epochs = 20;
    std::size_t batch_size = 64;
    double lr_stage1 = 1e-3;
    double lr_finetune_start = 1e-3;
    Mode mode = Mode::method;
    std::uint64_t seed = 1;
    // When set, R(t) and C(k) use the initial tau instead of the running
    // estimate; Eq-style tau bookkeeping still updates the running value.
    bool rates_use_initial_tau = false;
    // When set, the tau update counts only labels actually changed instead
    // of the whole eligible correction set.
    bool tau_counts_changed_only = false;
};

// Parameters and optimizer state of the two networks plus the correction
// bookkeeping. epoch is the ramp clock t and resets on retrain; generation
// counts retrains so shuffle streams never repeat.
struct TwinState {
    NetParams params1, params2;
    AdamState adam1, adam2;
    int epoch = 0;
    int correction_count = 0;
    double tau_current = 0.0;
    double lambda_current = 0.0;
    int generation = 0;
};

TwinState make_twin_state(const RunConfig& config);

// One pass over the dataset in a seeded shuffle: forward both networks,
// keep the small-loss fraction of each mini-batch, update both with Adam.
// standard_baseline mode trains network 1 alone with plain cross-entropy.
void train_epoch(TwinState& state, const LabeledDataset& dataset, const RunConfig& config,
                 double lr, std::optional<double> rate_override = std::nullopt);

// Full-dataset loss evaluation, correction-set selection at C(k), label
// rewrite where the networks agree, and the tau/k bookkeeping.
CorrectionOutcome correction_step(TwinState& state, LabeledDataset& dataset,
                                  const RunConfig& config);

// Reinitializes both networks (fresh seeds derived from the master seed and
// k) when the correction rate exceeded the restart threshold. Labels keep
// their corrected values. Returns whether a retrain happened.
bool maybe_retrain(TwinState& state, double correction_rate_used, const RunConfig& config);

// Linear lambda decay toward lambda_end, one step per correction event.
void lambda_step(TwinState& state, const RunConfig& config);

using EpochCallback = std::function<void(const TwinState&, int epoch_in_stage, double lr)>;

// Stage 2: labels frozen, lambda pinned at lambda_end, selection clamped at
// 1 - tau, learning rate decayed linearly to zero.
void fine_tune(TwinState& state, const LabeledDataset& dataset, const RunConfig& config,
               const EpochCallback& on_epoch = {});

struct EvalResult {
    double acc1 = 0.0;
    double acc2 = 0.0;
    double mean_acc = 0.0;
    double disagreement_rate = 0.0;
};

EvalResult evaluate(const NetParams& net1, const NetParams& net2, const Matrix& test_features,
                    const std::vector<int>& test_labels);
EvalResult evaluate(const TwinState& state, const Matrix& test_features,
                    const std::vector<int>& test_labels);

// Runs the configured mode end to end and returns one record per epoch.
// The dataset is taken by value; label corrections stay internal.
std::vector<MetricsRecord> run_experiment(const RunConfig& config, LabeledDataset train_dataset,
                                          const TestSet& test);

}  // namespace nlc
