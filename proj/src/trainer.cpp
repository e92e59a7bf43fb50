#include "nlc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "nlc/errors.hpp"
#include "nlc/losses.hpp"
#include "nlc/rng.hpp"

namespace nlc {

namespace {

constexpr std::uint64_t kNet1Stream = 0x11;
constexpr std::uint64_t kNet2Stream = 0x22;
constexpr std::uint64_t kShuffleStream = 0x33;
constexpr std::uint64_t kRetrainStream = 0x44;

double tau_for_rates(const TwinState& state, const RunConfig& config) {
    return config.rates_use_initial_tau ? config.schedules.tau0 : state.tau_current;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx, std::size_t begin,
                   std::size_t end) {
    Matrix out(end - begin, src.cols());
    for (std::size_t r = begin; r < end; ++r)
        std::copy(src.row(idx[r]).begin(), src.row(idx[r]).end(), out.row(r - begin).begin());
    return out;
}

std::vector<int> argmax_rows(const Matrix& probs) {
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const auto row = probs.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::method: return "method";
        case Mode::standard_baseline: return "standard_baseline";
        case Mode::joint_only_baseline: return "joint_only_baseline";
        case Mode::continuous_update_ablation: return "continuous_update_ablation";
        case Mode::no_retrain_ablation: return "no_retrain_ablation";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name) {
    if (name == "method") return Mode::method;
    if (name == "standard_baseline") return Mode::standard_baseline;
    if (name == "joint_only_baseline") return Mode::joint_only_baseline;
    if (name == "continuous_update_ablation") return Mode::continuous_update_ablation;
    if (name == "no_retrain_ablation") return Mode::no_retrain_ablation;
    throw ConfigError("unknown mode '" + name + "'");
}

TwinState make_twin_state(const RunConfig& config) {
    TwinState st;
    st.params1 = init_params(config.layer_dims, mix_seed(config.seed, kNet1Stream));
    st.params2 = init_params(config.layer_dims, mix_seed(config.seed, kNet2Stream));
    st.adam1 = make_adam_state(st.params1);
    st.adam2 = make_adam_state(st.params2);
    st.tau_current = config.schedules.tau0;
    st.lambda_current = config.schedules.lambda_start;
    return st;
}

void train_epoch(TwinState& state, const LabeledDataset& dataset, const RunConfig& config,
                 double lr, std::optional<double> rate_override) {
    if (dataset.size() == 0) throw ConfigError("cannot train on an empty dataset");

    const double rate =
        rate_override.value_or(selection_rate(state.epoch, config.schedules.t_k,
                                              tau_for_rates(state, config)));
    // tau = 1 would drive the keep rate to zero; keep at least the min-1 path
    const double keep_rate = std::clamp(rate, 1e-9, 1.0);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(mix_seed(mix_seed(config.seed, kShuffleStream),
                                 static_cast<std::uint64_t>(state.epoch),
                                 static_cast<std::uint64_t>(state.generation)));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size, ++batch_index) {
        const std::size_t end = std::min(begin + batch_size, order.size());
        const Matrix features = gather_rows(dataset.features, order, begin, end);
        std::vector<int> labels(end - begin);
        for (std::size_t r = begin; r < end; ++r)
            labels[r - begin] = dataset.current_labels[order[r]];

        try {
            if (config.mode == Mode::standard_baseline) {
                ForwardCache cache;
                const Matrix probs = forward(state.params1, features, &cache);
                Matrix dlogits(probs.rows(), probs.cols());
                const double inv_n = 1.0 / static_cast<double>(probs.rows());
                for (std::size_t i = 0; i < probs.rows(); ++i)
                    for (std::size_t j = 0; j < probs.cols(); ++j)
                        dlogits(i, j) =
                            inv_n * (probs(i, j) -
                                     (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
                const NetGrads grads = backprop(state.params1, cache, dlogits);
                adam_step(state.params1, grads, state.adam1, lr);
            } else {
                ForwardCache cache1, cache2;
                const Matrix p1 = forward(state.params1, features, &cache1);
                const Matrix p2 = forward(state.params2, features, &cache2);
                const PerExampleLosses losses =
                    joint_losses(p1, p2, labels, state.lambda_current);
                const std::vector<bool> mask = small_loss_select(losses.joint, keep_rate);
                const LogitGrads grads =
                    joint_loss_grad(p1, p2, labels, state.lambda_current, mask);
                const NetGrads g1 = backprop(state.params1, cache1, grads.net1);
                const NetGrads g2 = backprop(state.params2, cache2, grads.net2);
                adam_step(state.params1, g1, state.adam1, lr);
                adam_step(state.params2, g2, state.adam2, lr);
            }
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (batch " +
                               std::to_string(batch_index) + ")");
        }
    }
    state.epoch += 1;
}

CorrectionOutcome correction_step(TwinState& state, LabeledDataset& dataset,
                                  const RunConfig& config) {
    const Matrix p1 = forward(state.params1, dataset.features);
    const Matrix p2 = forward(state.params2, dataset.features);
    const PerExampleLosses losses =
        joint_losses(p1, p2, dataset.current_labels, state.lambda_current);
    const std::vector<int> pred1 = argmax_rows(p1);
    const std::vector<int> pred2 = argmax_rows(p2);

    const int k_next = state.correction_count + 1;
    const double rate = correction_rate(k_next, tau_for_rates(state, config));
    const CorrectionSets sets = select_correction_set(losses.agr, losses.sup, rate);

    CorrectionOutcome outcome =
        apply_correction(dataset.current_labels, sets.correction, pred1, pred2);
    outcome.rate_used = rate;
    const std::size_t tau_count = config.tau_counts_changed_only
                                      ? outcome.changed.size()
                                      : outcome.correction_set.size();
    outcome.new_tau = update_tau(state.tau_current, tau_count, dataset.size());

    dataset.current_labels = outcome.new_labels;
    state.tau_current = outcome.new_tau;
    state.correction_count = k_next;
    return outcome;
}

bool maybe_retrain(TwinState& state, double correction_rate_used, const RunConfig& config) {
    if (config.mode == Mode::no_retrain_ablation) return false;
    if (correction_rate_used <= config.schedules.c_restart) return false;

    const auto k = static_cast<std::uint64_t>(state.correction_count);
    state.params1 = init_params(config.layer_dims, mix_seed(config.seed, kRetrainStream, 2 * k));
    state.params2 =
        init_params(config.layer_dims, mix_seed(config.seed, kRetrainStream, 2 * k + 1));
    state.adam1 = make_adam_state(state.params1);
    state.adam2 = make_adam_state(state.params2);
    state.epoch = 0;
    state.generation += 1;
    return true;
}

void lambda_step(TwinState& state, const RunConfig& config) {
    const auto& s = config.schedules;
    const double planned_updates =
        static_cast<double>(config.stage1_epochs) / static_cast<double>(s.t_update);
    const double delta = (s.lambda_start - s.lambda_end) / planned_updates;
    const double next = s.lambda_start - static_cast<double>(state.correction_count) * delta;
    state.lambda_current = std::max(s.lambda_end, next);
}

void fine_tune(TwinState& state, const LabeledDataset& dataset, const RunConfig& config,
               const EpochCallback& on_epoch) {
    state.lambda_current = config.schedules.lambda_end;
    const double clamped_rate = 1.0 - tau_for_rates(state, config);
    const int epochs = config.finetune_epochs;
    for (int e = 0; e < epochs; ++e) {
        const double lr = config.lr_finetune_start *
                          (1.0 - static_cast<double>(e) / static_cast<double>(epochs));
        train_epoch(state, dataset, config, lr, clamped_rate);
        if (on_epoch) on_epoch(state, e, lr);
    }
}

EvalResult evaluate(const NetParams& net1, const NetParams& net2, const Matrix& test_features,
                    const std::vector<int>& test_labels) {
    if (test_features.rows() == 0) throw ConfigError("test set is empty");
    if (test_features.rows() != test_labels.size())
        throw DimensionError("test features and labels disagree in length");

    const std::vector<int> pred1 = argmax_rows(forward(net1, test_features));
    const std::vector<int> pred2 = argmax_rows(forward(net2, test_features));
    const auto n = static_cast<double>(test_labels.size());

    EvalResult r;
    std::size_t hits1 = 0, hits2 = 0, disagree = 0;
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
        hits1 += pred1[i] == test_labels[i];
        hits2 += pred2[i] == test_labels[i];
        disagree += pred1[i] != pred2[i];
    }
    r.acc1 = static_cast<double>(hits1) / n;
    r.acc2 = static_cast<double>(hits2) / n;
    r.mean_acc = 0.5 * (r.acc1 + r.acc2);
    r.disagreement_rate = static_cast<double>(disagree) / n;
    return r;
}

EvalResult evaluate(const TwinState& state, const Matrix& test_features,
                    const std::vector<int>& test_labels) {
    return evaluate(state.params1, state.params2, test_features, test_labels);
}

std::vector<MetricsRecord> run_experiment(const RunConfig& config, LabeledDataset dataset,
                                          const TestSet& test) {
    using Clock = std::chrono::steady_clock;

    TwinState state = make_twin_state(config);
    std::vector<MetricsRecord> records;
    records.reserve(static_cast<std::size_t>(config.stage1_epochs + config.finetune_epochs));
    int global_epoch = 0;

    auto emit = [&](const std::string& stage, int corrected, bool retrained, double wall_ms) {
        const EvalResult ev = (config.mode == Mode::standard_baseline)
                                  ? evaluate(state.params1, state.params1, test.features,
                                             test.labels)
                                  : evaluate(state, test.features, test.labels);
        MetricsRecord r;
        r.epoch = global_epoch;
        r.stage = stage;
        r.mode = to_string(config.mode);
        r.k = state.correction_count;
        r.tau_est = state.tau_current;
        r.lambda = state.lambda_current;
        r.acc1 = ev.acc1;
        r.acc2 = ev.acc2;
        r.mean_acc = ev.mean_acc;
        r.disagreement_rate = ev.disagreement_rate;
        r.label_acc = dataset.label_accuracy();
        r.num_corrected_this_event = corrected;
        r.retrained = retrained;
        r.wall_ms = wall_ms;
        records.push_back(std::move(r));
        global_epoch += 1;
    };

    const int t_update = config.schedules.t_update;
    for (int e = 1; e <= config.stage1_epochs; ++e) {
        const auto t0 = Clock::now();
        train_epoch(state, dataset, config, config.lr_stage1);

        int corrected = 0;
        bool retrained = false;
        bool do_correction = false;
        bool advance_lambda_only = false;
        switch (config.mode) {
            case Mode::method:
            case Mode::no_retrain_ablation:
                do_correction = (e % t_update == 0);
                break;
            case Mode::continuous_update_ablation:
                do_correction = (e >= t_update);  // warm-up, then every epoch
                break;
            case Mode::joint_only_baseline:
                advance_lambda_only = (e % t_update == 0);
                break;
            case Mode::standard_baseline:
                break;
        }

        if (do_correction) {
            const CorrectionOutcome outcome = correction_step(state, dataset, config);
            corrected = static_cast<int>(outcome.changed.size());
            lambda_step(state, config);
            retrained = maybe_retrain(state, outcome.rate_used, config);
        } else if (advance_lambda_only) {
            state.correction_count += 1;
            lambda_step(state, config);
        }

        const double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        emit("iterative", corrected, retrained, wall_ms);
    }

    auto ft_start = Clock::now();
    fine_tune(state, dataset, config, [&](const TwinState&, int, double) {
        const double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - ft_start).count();
        emit("finetune", 0, false, wall_ms);
        ft_start = Clock::now();
    });

    return records;
}

}  // namespace nlc
