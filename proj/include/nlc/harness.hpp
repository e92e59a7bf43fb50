#pragma once

#include <string>

#include "nlc/config.hpp"
#include "nlc/dataset.hpp"

namespace nlc {

// Train/test data resolved from the configuration: either loaded from the
// configured CSV or generated blobs with noise applied to the train side.
struct ExperimentData {
    LabeledDataset train;
    TestSet test;
};

TransitionMatrix build_transition_matrix(const HarnessConfig& cfg);
ExperimentData build_experiment_data(const HarnessConfig& cfg);

// One experiment; writes the repro block, per-epoch records and summary to
// cfg.out and returns the records.
std::vector<MetricsRecord> run_single(const HarnessConfig& cfg);

// CLI entry points. Each returns a process exit status.
int run_train(const HarnessConfig& cfg);
int run_baseline(const HarnessConfig& cfg);
// which: "interval" (method vs continuous update) or "retrain" (method vs
// no retraining); both runs share the corrupted dataset and seed.
int run_ablate(const HarnessConfig& cfg, const std::string& which);
int run_gendata(const HarnessConfig& cfg, const std::string& q_out_path = "");

}  // namespace nlc
