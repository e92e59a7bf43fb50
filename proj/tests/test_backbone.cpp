#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fd_check.hpp"
#include "nlc/backbone.hpp"
#include "nlc/errors.hpp"
#include "nlc/losses.hpp"

using namespace nlc;

namespace {

Matrix random_batch(std::size_t rows, std::size_t cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (double& v : m.storage()) v = gauss(rng);
    return m;
}

std::vector<int> random_labels(std::size_t n, int classes, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(0, classes - 1);
    std::vector<int> y(n);
    for (int& v : y) v = dist(rng);
    return y;
}

}  // namespace

TEST_CASE("init_params seeds and validation") {
    const std::vector<std::size_t> dims{4, 8, 3};
    const NetParams a = init_params(dims, 1);
    const NetParams b = init_params(dims, 2);
    const NetParams a2 = init_params(dims, 1);

    bool any_diff = false;
    for (std::size_t l = 0; l < a.num_layers(); ++l)
        if (!(a.weights[l] == b.weights[l])) any_diff = true;
    CHECK(any_diff);

    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        CHECK(a.weights[l] == a2.weights[l]);
        for (double v : a.biases[l]) CHECK(v == 0.0);
    }
    CHECK(a.num_params() == 4 * 8 + 8 + 8 * 3 + 3);

    CHECK_THROWS_AS(init_params({4}, 1), ConfigError);
    CHECK_THROWS_AS(init_params({}, 1), ConfigError);
    CHECK_THROWS_AS(init_params({4, 0, 3}, 1), ConfigError);
}

TEST_CASE("forward produces probability rows") {
    const NetParams p = init_params({5, 7, 4}, 3);
    const Matrix x = random_batch(6, 5, 42);
    const Matrix probs = forward(p, x);

    REQUIRE(probs.rows() == 6);
    REQUIRE(probs.cols() == 4);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double sum = 0.0;
        for (double v : probs.row(i)) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("forward on zero weights is uniform") {
    NetParams p = init_params({3, 4}, 1);
    for (double& v : p.weights[0].storage()) v = 0.0;
    const Matrix probs = forward(p, random_batch(5, 3, 7));
    for (std::size_t i = 0; i < probs.rows(); ++i)
        for (double v : probs.row(i)) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward single example and shape errors") {
    const NetParams p = init_params({5, 7, 4}, 3);
    const Matrix probs = forward(p, random_batch(1, 5, 9));
    CHECK(probs.rows() == 1);
    CHECK(probs.cols() == 4);
    CHECK_THROWS_AS(forward(p, random_batch(2, 6, 9)), DimensionError);
}

TEST_CASE("forward is deterministic") {
    const NetParams p = init_params({4, 6, 3}, 11);
    const Matrix x = random_batch(8, 4, 5);
    CHECK(forward(p, x) == forward(p, x));
}

TEST_CASE("backprop zero upstream gives zero gradients") {
    const NetParams p = init_params({4, 6, 3}, 1);
    const Matrix x = random_batch(5, 4, 2);
    ForwardCache cache;
    forward(p, x, &cache);
    const NetGrads g = backprop(p, cache, Matrix(5, 3));
    for (const auto& w : g.weights)
        for (double v : w.storage()) CHECK(v == 0.0);
    for (const auto& b : g.biases)
        for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("backprop sums over the batch") {
    const NetParams p = init_params({4, 6, 3}, 1);
    Matrix one = random_batch(1, 4, 3);
    Matrix two(2, 4);
    for (std::size_t j = 0; j < 4; ++j) two(0, j) = two(1, j) = one(0, j);

    ForwardCache c1, c2;
    const Matrix p_one = forward(p, one, &c1);
    forward(p, two, &c2);

    Matrix d1(1, 3), d2(2, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        d1(0, j) = p_one(0, j) - (j == 1 ? 1.0 : 0.0);
        d2(0, j) = d2(1, j) = d1(0, j);
    }
    const NetGrads g1 = backprop(p, c1, d1);
    const NetGrads g2 = backprop(p, c2, d2);
    for (std::size_t l = 0; l < g1.weights.size(); ++l)
        for (std::size_t i = 0; i < g1.weights[l].size(); ++i)
            CHECK(g2.weights[l].storage()[i] ==
                  doctest::Approx(2.0 * g1.weights[l].storage()[i]).epsilon(1e-12));
}

TEST_CASE("backprop matches finite differences on cross-entropy") {
    const std::vector<std::size_t> dims{5, 8, 4};
    NetParams p = init_params(dims, 17);
    const Matrix x = random_batch(6, 5, 23);
    const auto y = random_labels(6, 4, 29);

    auto ce_loss = [&](const NetParams& net) {
        const Matrix probs = forward(net, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < probs.rows(); ++i) sum += cross_entropy(probs.row(i), y[i]);
        return sum / static_cast<double>(probs.rows());
    };

    ForwardCache cache;
    const Matrix probs = forward(p, x, &cache);
    Matrix dlogits(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            dlogits(i, j) =
                (probs(i, j) - (static_cast<std::size_t>(y[i]) == j ? 1.0 : 0.0)) / 6.0;

    const auto analytic = nlc_test::flatten(backprop(p, cache, dlogits));
    const auto numeric = nlc_test::fd_gradient(p, ce_loss);
    CHECK(nlc_test::max_rel_error(analytic, numeric) < 1e-4);
}

TEST_CASE("adam step behaviour") {
    SUBCASE("zero gradients leave parameters unchanged") {
        NetParams p = init_params({3, 2}, 1);
        const NetParams before = p;
        AdamState st = make_adam_state(p);
        NetGrads g{{Matrix(3, 2)}, {std::vector<double>(2, 0.0)}};
        adam_step(p, g, st, 0.1);
        CHECK(p.weights[0] == before.weights[0]);
        CHECK(p.biases[0] == before.biases[0]);
        CHECK(st.step == 1);
    }

    SUBCASE("first step moves by -lr within epsilon") {
        NetParams p;
        p.layer_dims = {1, 1};
        p.weights.emplace_back(1, 1, 0.0);
        p.biases.emplace_back(1, 0.0);
        AdamState st = make_adam_state(p);
        NetGrads g{{Matrix(1, 1, 1.0)}, {std::vector<double>(1, 0.0)}};
        adam_step(p, g, st, 0.1);
        CHECK(p.weights[0](0, 0) == doctest::Approx(-0.1).epsilon(1e-7));
    }

    SUBCASE("zero learning rate leaves parameters unchanged") {
        NetParams p = init_params({3, 2}, 1);
        const NetParams before = p;
        AdamState st = make_adam_state(p);
        NetGrads g{{Matrix(3, 2, 0.5)}, {std::vector<double>(2, 0.5)}};
        adam_step(p, g, st, 0.0);
        CHECK(p.weights[0] == before.weights[0]);
    }

    SUBCASE("non-finite gradient names the layer") {
        NetParams p = init_params({3, 4, 2}, 1);
        AdamState st = make_adam_state(p);
        NetGrads g{{Matrix(3, 4), Matrix(4, 2)},
                   {std::vector<double>(4, 0.0), std::vector<double>(2, 0.0)}};
        g.weights[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
        try {
            adam_step(p, g, st, 0.1);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
        }
    }
}
