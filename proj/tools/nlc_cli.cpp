#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nlc/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string seed, tau, noise, mode, out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--tau", tau, "noise rate in [0,1]");
        cmd->add_option("--noise", noise, "symmetric|pairmap|circular");
        cmd->add_option("--mode", mode,
                        "method|standard_baseline|joint_only_baseline|"
                        "continuous_update_ablation|no_retrain_ablation");
        cmd->add_option("--out", out, "output path");
    }

    std::map<std::string, std::string> overrides() const {
        std::map<std::string, std::string> o;
        if (!seed.empty()) o["seed"] = seed;
        if (!tau.empty()) o["tau"] = tau;
        if (!noise.empty()) o["noise"] = noise;
        if (!mode.empty()) o["mode"] = mode;
        if (!out.empty()) o["out"] = out;
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twin-network training with small-loss selection and label correction"};
    app.require_subcommand(1);

    CommonFlags train_flags, baseline_flags, ablate_flags, gendata_flags;
    std::string ablate_which;
    std::string q_out;

    auto* train = app.add_subcommand("train", "run an experiment in the configured mode");
    train_flags.attach(train);

    auto* baseline = app.add_subcommand("baseline", "run a baseline (standard by default)");
    baseline_flags.attach(baseline);

    auto* ablate =
        app.add_subcommand("ablate", "paired method-vs-ablation runs on shared data");
    ablate->add_option("which", ablate_which, "interval|retrain")->required();
    ablate_flags.attach(ablate);

    auto* gendata = app.add_subcommand("gen-data", "write a noisy blob dataset as CSV");
    gendata_flags.attach(gendata);
    gendata->add_option("--q-out", q_out, "also dump the transition matrix as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return nlc::run_train(nlc::parse_config(train_flags.config_path,
                                                    train_flags.overrides()));
        if (baseline->parsed())
            return nlc::run_baseline(nlc::parse_config(baseline_flags.config_path,
                                                       baseline_flags.overrides()));
        if (ablate->parsed())
            return nlc::run_ablate(nlc::parse_config(ablate_flags.config_path,
                                                     ablate_flags.overrides()),
                                   ablate_which);
        if (gendata->parsed())
            return nlc::run_gendata(nlc::parse_config(gendata_flags.config_path,
                                                      gendata_flags.overrides()),
                                    q_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
