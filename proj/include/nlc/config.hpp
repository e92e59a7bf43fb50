#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nlc/trainer.hpp"

namespace nlc {

// Fully resolved experiment configuration: the trainer's RunConfig plus the
// dataset, noise and output settings the harness needs. Defaults are desk
// scale; every field maps to a key=value config line of the same name.
struct HarnessConfig {
    std::uint64_t seed = 1;
    std::string mode = "method";
    std::string out = "metrics.jsonl";
    std::string data;  // optional CSV path; replaces generation when set

    // noise
    double tau = 0.5;
    std::string noise = "symmetric";  // symmetric | pairmap | circular
    std::string pairs = "9>1,4>7,2>0,3>5,5>3";
    int superclass_size = 5;

    // synthetic data
    int num_classes = 10;
    int per_class = 700;
    int dim = 20;
    double separation = 3.0;
    double spread = 1.0;
    double test_fraction = 2.0 / 7.0;

    // model and schedule
    std::string hidden = "128,64";
    int batch_size = 64;
    int stage1_epochs = 60;
    int finetune_epochs = 20;
    double lr_stage1 = 1e-3;
    double lr_finetune_start = 1e-3;
    int t_k = 10;
    int t_update = 10;
    double c_restart = 0.05;
    double lambda_start = 0.9;
    double lambda_end = 0.7;
    bool rates_use_initial_tau = false;
    bool tau_count_changed_only = false;
};

// Reads key=value lines ('#' comments, blank lines allowed), applies flag
// overrides on top, validates everything. Unknown keys and out-of-range
// values raise ConfigError naming the key. file_path may be empty.
HarnessConfig parse_config(const std::string& file_path,
                           const std::map<std::string, std::string>& overrides = {});

// "128,64" -> {128, 64}; empty string means no hidden layer.
std::vector<std::size_t> parse_hidden(const std::string& spec);

// "9>1,3>5" -> {(9,1), (3,5)}.
std::vector<std::pair<int, int>> parse_pairs(const std::string& spec);

RunConfig to_run_config(const HarnessConfig& cfg, std::size_t input_dim);

// The reproducibility block written as the first metrics line.
nlohmann::ordered_json config_json(const HarnessConfig& cfg);

}  // namespace nlc
