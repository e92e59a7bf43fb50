#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlc/dataset.hpp"
#include "nlc/errors.hpp"
#include "nlc/losses.hpp"
#include "nlc/trainer.hpp"

using namespace nlc;

namespace {

struct TinyBench {
    LabeledDataset train;
    TestSet test;
};

// small separable blob problem with optional symmetric noise
TinyBench make_bench(std::size_t classes, std::size_t per_class, double tau,
                     std::uint64_t seed) {
    auto blobs = gen_gaussian_blobs(classes, per_class, 4, 3.0, 0.8, seed);
    const auto clean = dataset_from_clean(std::move(blobs.features),
                                          std::move(blobs.clean_labels), classes);
    auto parts = split(clean, 0.25, seed + 1);
    TinyBench b;
    b.test = std::move(parts.test);
    b.train = make_noisy_dataset(std::move(parts.train.features), *parts.train.clean_labels,
                                 symmetric_q(classes, tau), seed + 2);
    return b;
}

RunConfig tiny_config(std::size_t dim, std::size_t classes, double tau, Mode mode) {
    RunConfig cfg;
    cfg.layer_dims = {dim, 16, classes};
    cfg.schedules.tau0 = tau;
    cfg.schedules.t_k = 5;
    cfg.schedules.t_update = 5;
    cfg.stage1_epochs = 20;
    cfg.finetune_epochs = 5;
    cfg.batch_size = 32;
    cfg.mode = mode;
    cfg.seed = 7;
    return cfg;
}

double mean_joint_loss(const TwinState& st, const LabeledDataset& ds, double lambda) {
    const Matrix p1 = forward(st.params1, ds.features);
    const Matrix p2 = forward(st.params2, ds.features);
    const auto losses = joint_losses(p1, p2, ds.current_labels, lambda);
    double sum = 0.0;
    for (double v : losses.joint) sum += v;
    return sum / static_cast<double>(losses.joint.size());
}

bool same_params(const NetParams& a, const NetParams& b) {
    for (std::size_t l = 0; l < a.num_layers(); ++l)
        if (!(a.weights[l] == b.weights[l]) || a.biases[l] != b.biases[l]) return false;
    return true;
}

// single linear layer that reproduces the argmax of the first C features
NetParams argmax_net(std::size_t classes, double gain) {
    NetParams p;
    p.layer_dims = {classes, classes};
    Matrix w(classes, classes);
    for (std::size_t i = 0; i < classes; ++i) w(i, i) = gain;
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(classes, 0.0);
    return p;
}

}  // namespace

TEST_CASE("make_twin_state differs between the two networks and is reproducible") {
    const auto cfg = tiny_config(4, 3, 0.3, Mode::method);
    const TwinState a = make_twin_state(cfg);
    const TwinState b = make_twin_state(cfg);
    CHECK(same_params(a.params1, b.params1));
    CHECK(same_params(a.params2, b.params2));
    CHECK(!same_params(a.params1, a.params2));
    CHECK(a.tau_current == 0.3);
    CHECK(a.lambda_current == 0.9);
}

TEST_CASE("train_epoch is deterministic and reduces the joint loss") {
    const auto bench = make_bench(3, 100, 0.0, 11);
    const auto cfg = tiny_config(4, 3, 0.0, Mode::method);

    TwinState a = make_twin_state(cfg);
    TwinState b = make_twin_state(cfg);
    const double before = mean_joint_loss(a, bench.train, a.lambda_current);
    train_epoch(a, bench.train, cfg, cfg.lr_stage1);
    train_epoch(b, bench.train, cfg, cfg.lr_stage1);

    CHECK(same_params(a.params1, b.params1));
    CHECK(same_params(a.params2, b.params2));
    CHECK(a.epoch == 1);

    const double after = mean_joint_loss(a, bench.train, a.lambda_current);
    CHECK(after < before);

    LabeledDataset empty;
    CHECK_THROWS_AS(train_epoch(a, empty, cfg, 0.001), ConfigError);
}

TEST_CASE("correction_step with zero rate advances k and leaves labels alone") {
    auto bench = make_bench(3, 60, 0.0, 13);
    const auto cfg = tiny_config(4, 3, 0.0, Mode::method);
    TwinState st = make_twin_state(cfg);

    const auto labels_before = bench.train.current_labels;
    const auto outcome = correction_step(st, bench.train, cfg);
    CHECK(outcome.rate_used == 0.0);
    CHECK(outcome.correction_set.empty());
    CHECK(outcome.changed.empty());
    CHECK(bench.train.current_labels == labels_before);
    CHECK(st.correction_count == 1);
    CHECK(st.tau_current == 0.0);
}

TEST_CASE("correction_step with oracle networks only restores labels") {
    // features carry the class in their first C coordinates, so a diagonal
    // net predicts the clean label for every example
    const std::size_t classes = 4, n = 400;
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss(0.0, 0.05);
    Matrix features(n, classes);
    std::vector<int> clean(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(i % classes);
        clean[i] = static_cast<int>(c);
        for (std::size_t j = 0; j < classes; ++j)
            features(i, j) = (j == c ? 5.0 : 0.0) + gauss(rng);
    }
    auto ds = make_noisy_dataset(features, clean, symmetric_q(classes, 0.5), 19);

    auto cfg = tiny_config(classes, classes, 0.5, Mode::method);
    cfg.layer_dims = {classes, classes};
    TwinState st = make_twin_state(cfg);
    st.params1 = argmax_net(classes, 1.0);
    st.params2 = argmax_net(classes, 1.1);

    const double acc_before = *ds.label_accuracy();
    const auto outcome = correction_step(st, ds, cfg);
    const double acc_after = *ds.label_accuracy();

    CHECK(outcome.rate_used == doctest::Approx(0.25));
    CHECK(!outcome.changed.empty());
    CHECK(acc_after > acc_before);
    for (int i : outcome.changed)
        CHECK(ds.current_labels[static_cast<std::size_t>(i)] ==
              clean[static_cast<std::size_t>(i)]);

    // repeat from identical state: identical outcome
    auto ds2 = make_noisy_dataset(features, clean, symmetric_q(classes, 0.5), 19);
    TwinState st2 = make_twin_state(cfg);
    st2.params1 = argmax_net(classes, 1.0);
    st2.params2 = argmax_net(classes, 1.1);
    const auto outcome2 = correction_step(st2, ds2, cfg);
    CHECK(outcome2.correction_set == outcome.correction_set);
    CHECK(outcome2.changed == outcome.changed);
    CHECK(outcome2.new_tau == outcome.new_tau);
}

TEST_CASE("maybe_retrain") {
    const auto cfg = tiny_config(4, 3, 0.5, Mode::method);
    TwinState st = make_twin_state(cfg);
    st.epoch = 9;
    st.correction_count = 1;
    const NetParams old1 = st.params1;

    SUBCASE("rate above the threshold reinitializes") {
        CHECK(maybe_retrain(st, 0.25, cfg));
        CHECK(!same_params(st.params1, old1));
        CHECK(st.epoch == 0);
        CHECK(st.generation == 1);
        CHECK(st.adam1.step == 0);
        CHECK(!same_params(st.params1, st.params2));
    }

    SUBCASE("rate at or below the threshold passes through") {
        CHECK(!maybe_retrain(st, 0.01, cfg));
        CHECK(!maybe_retrain(st, cfg.schedules.c_restart, cfg));
        CHECK(same_params(st.params1, old1));
        CHECK(st.epoch == 9);
    }

    SUBCASE("no_retrain_ablation never reinitializes") {
        auto cfg2 = cfg;
        cfg2.mode = Mode::no_retrain_ablation;
        CHECK(!maybe_retrain(st, 0.25, cfg2));
        CHECK(same_params(st.params1, old1));
    }
}

TEST_CASE("lambda_step endpoints and clamp") {
    auto cfg = tiny_config(4, 3, 0.5, Mode::method);
    cfg.stage1_epochs = 60;
    cfg.schedules.t_update = 10;  // 6 planned updates
    TwinState st = make_twin_state(cfg);

    st.correction_count = 0;
    lambda_step(st, cfg);
    CHECK(st.lambda_current == doctest::Approx(0.9).epsilon(1e-12));

    st.correction_count = 3;
    lambda_step(st, cfg);
    CHECK(st.lambda_current == doctest::Approx(0.8).epsilon(1e-12));

    st.correction_count = 6;
    lambda_step(st, cfg);
    CHECK(st.lambda_current == doctest::Approx(0.7).epsilon(1e-12));

    st.correction_count = 11;
    lambda_step(st, cfg);
    CHECK(st.lambda_current == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("fine_tune freezes labels and ramps the rate to zero") {
    auto bench = make_bench(3, 80, 0.2, 23);
    auto cfg = tiny_config(4, 3, 0.2, Mode::method);

    SUBCASE("zero epochs change nothing") {
        cfg.finetune_epochs = 0;
        TwinState st = make_twin_state(cfg);
        const NetParams before = st.params1;
        fine_tune(st, bench.train, cfg);
        CHECK(same_params(st.params1, before));
    }

    SUBCASE("linear decay ends one step above zero") {
        cfg.finetune_epochs = 5;
        TwinState st = make_twin_state(cfg);
        const auto labels_before = bench.train.current_labels;
        std::vector<double> lrs;
        fine_tune(st, bench.train, cfg,
                  [&](const TwinState&, int, double lr) { lrs.push_back(lr); });
        REQUIRE(lrs.size() == 5);
        CHECK(lrs.front() == doctest::Approx(0.001).epsilon(1e-12));
        CHECK(lrs.back() == doctest::Approx(0.001 / 5.0).epsilon(1e-12));
        CHECK(bench.train.current_labels == labels_before);
        CHECK(st.lambda_current == doctest::Approx(0.7));
    }
}

TEST_CASE("evaluate") {
    const std::size_t classes = 10;

    SUBCASE("identical networks never disagree") {
        const NetParams net = init_params({6, 12, classes}, 3);
        std::mt19937 rng(5);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Matrix x(50, 6);
        for (double& v : x.storage()) v = gauss(rng);
        std::vector<int> y(50, 0);
        const EvalResult r = evaluate(net, net, x, y);
        CHECK(r.disagreement_rate == 0.0);
        CHECK(r.acc1 == r.acc2);
    }

    SUBCASE("an always-correct network scores 1.0") {
        const NetParams net = argmax_net(classes, 2.0);
        Matrix x(30, classes);
        std::vector<int> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            const auto c = static_cast<std::size_t>(i % classes);
            x(i, c) = 3.0;
            y[i] = static_cast<int>(c);
        }
        const EvalResult r = evaluate(net, net, x, y);
        CHECK(r.acc1 == 1.0);
        CHECK(r.mean_acc == 1.0);
    }

    SUBCASE("untrained networks sit at chance level") {
        // unclustered features and independent labels keep the per-example
        // outcomes independent, so 2000 draws concentrate hard around 1/C
        std::mt19937 rng(31);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_int_distribution<int> label(0, static_cast<int>(classes) - 1);
        Matrix x(2000, 8);
        for (double& v : x.storage()) v = gauss(rng);
        std::vector<int> y(2000);
        for (int& v : y) v = label(rng);

        const NetParams n1 = init_params({8, 16, classes}, 101);
        const NetParams n2 = init_params({8, 16, classes}, 202);
        const EvalResult r = evaluate(n1, n2, x, y);
        CHECK(std::fabs(r.mean_acc - 0.1) < 0.03);
    }

    SUBCASE("empty test set rejected") {
        const NetParams net = argmax_net(classes, 1.0);
        CHECK_THROWS_AS(evaluate(net, net, Matrix(), {}), ConfigError);
    }
}

TEST_CASE("run_experiment on a clean dataset never touches labels") {
    const auto bench = make_bench(3, 80, 0.0, 37);
    const auto cfg = tiny_config(4, 3, 0.0, Mode::method);
    const auto records = run_experiment(cfg, bench.train, bench.test);

    REQUIRE(records.size() == 25);
    for (const auto& r : records) {
        CHECK(r.num_corrected_this_event == 0);
        CHECK(!r.retrained);
        CHECK(r.tau_est == 0.0);
        REQUIRE(r.label_acc.has_value());
        CHECK(*r.label_acc == 1.0);
    }
}

TEST_CASE("run_experiment is deterministic modulo wall time") {
    const auto bench = make_bench(3, 60, 0.3, 41);
    const auto cfg = tiny_config(4, 3, 0.3, Mode::method);
    const auto a = run_experiment(cfg, bench.train, bench.test);
    const auto b = run_experiment(cfg, bench.train, bench.test);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(record_to_json(a[i]) == record_to_json(b[i]));
}

TEST_CASE("method-mode log reconstructs the schedule") {
    const auto bench = make_bench(4, 100, 0.4, 43);
    auto cfg = tiny_config(4, 4, 0.4, Mode::method);
    const auto records = run_experiment(cfg, bench.train, bench.test);

    int prev_k = 0;
    double prev_tau = cfg.schedules.tau0;
    double prev_lambda = cfg.schedules.lambda_start;
    for (const auto& r : records) {
        if (r.stage == "iterative") {
            if (r.k != prev_k) {
                CHECK(r.k == prev_k + 1);
                CHECK((r.epoch + 1) % cfg.schedules.t_update == 0);
            }
            CHECK(r.lambda <= prev_lambda + 1e-12);
            CHECK(r.lambda >= cfg.schedules.lambda_end - 1e-12);
            CHECK(r.lambda <= cfg.schedules.lambda_start + 1e-12);
            prev_lambda = r.lambda;
        }
        CHECK(r.tau_est <= prev_tau + 1e-12);
        prev_tau = r.tau_est;
        prev_k = r.k;
    }
}

TEST_CASE("standard baseline trains one network and logs no events") {
    const auto bench = make_bench(3, 80, 0.3, 47);
    auto cfg = tiny_config(4, 3, 0.3, Mode::standard_baseline);

    TwinState st = make_twin_state(cfg);
    const NetParams net2_before = st.params2;
    train_epoch(st, bench.train, cfg, cfg.lr_stage1);
    CHECK(same_params(st.params2, net2_before));
    CHECK(!same_params(st.params1, make_twin_state(cfg).params1));

    const auto records = run_experiment(cfg, bench.train, bench.test);
    for (const auto& r : records) {
        CHECK(r.k == 0);
        CHECK(r.num_corrected_this_event == 0);
        CHECK(!r.retrained);
        CHECK(r.disagreement_rate == 0.0);
        CHECK(r.acc1 == r.acc2);
    }
}

TEST_CASE("continuous ablation corrects every epoch after warm-up") {
    const auto bench = make_bench(3, 80, 0.4, 53);
    auto cfg = tiny_config(4, 3, 0.4, Mode::continuous_update_ablation);
    const auto records = run_experiment(cfg, bench.train, bench.test);

    int prev_k = 0;
    for (const auto& r : records) {
        if (r.stage != "iterative") break;
        const int e = r.epoch + 1;  // 1-based epoch count
        if (e < cfg.schedules.t_update)
            CHECK(r.k == 0);
        else
            CHECK(r.k == prev_k + 1);
        prev_k = r.k;
    }
}

TEST_CASE("joint-only baseline matches method exactly when tau0 is zero") {
    const auto bench = make_bench(3, 80, 0.0, 59);
    auto m_cfg = tiny_config(4, 3, 0.0, Mode::method);
    auto j_cfg = tiny_config(4, 3, 0.0, Mode::joint_only_baseline);

    const auto m = run_experiment(m_cfg, bench.train, bench.test);
    const auto j = run_experiment(j_cfg, bench.train, bench.test);
    REQUIRE(m.size() == j.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i].mean_acc == j[i].mean_acc);
        CHECK(m[i].acc1 == j[i].acc1);
        CHECK(m[i].lambda == j[i].lambda);
        CHECK(m[i].k == j[i].k);
    }
}
