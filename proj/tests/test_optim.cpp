#include <doctest.h>

#include <cmath>

#include "tsad/optim.hpp"

using namespace tsad;

TEST_CASE("nelder_mead minimizes a 1-d quadratic") {
    auto [x, f] = nelder_mead([](const std::vector<double>& v) {
        return (v[0] - 3.0) * (v[0] - 3.0);
    }, {0.0});
    CHECK(std::abs(x[0] - 3.0) < 1e-4);
    CHECK(f < 1e-8);
}

TEST_CASE("nelder_mead minimizes a 2-d bowl") {
    auto [x, f] = nelder_mead([](const std::vector<double>& v) {
        return v[0] * v[0] + v[1] * v[1];
    }, {1.0, 1.0});
    CHECK(std::abs(x[0]) < 1e-4);
    CHECK(std::abs(x[1]) < 1e-4);
}

TEST_CASE("nelder_mead solves rosenbrock") {
    SimplexOptions opts;
    opts.max_iters = 2000;
    auto rosenbrock = [](const std::vector<double>& v) {
        const double a = 1.0 - v[0];
        const double b = v[1] - v[0] * v[0];
        return a * a + 100.0 * b * b;
    };
    auto [x, f] = nelder_mead(rosenbrock, {-1.2, 1.0}, opts);
    CHECK(std::abs(x[0] - 1.0) < 1e-2);
    CHECK(std::abs(x[1] - 1.0) < 1e-2);
    CHECK(f < 1e-4);
}

TEST_CASE("nelder_mead never returns worse than the starting point") {
    auto objective = [](const std::vector<double>& v) {
        return std::abs(std::sin(v[0]) + 0.3 * v[0] * v[0]);
    };
    for (double x0 : {-3.0, 0.7, 5.0}) {
        auto [x, f] = nelder_mead(objective, {x0});
        CHECK(f <= objective({x0}));
    }
    CHECK_THROWS(nelder_mead([](const std::vector<double>&) {
        return std::nan("");
    }, {1.0}));
}

TEST_CASE("clip_gradients scales only above the norm") {
    std::vector<double> clipped = clip_gradients({3.0, 4.0}, 1.0);
    CHECK(clipped[0] == doctest::Approx(0.6));
    CHECK(clipped[1] == doctest::Approx(0.8));

    CHECK(clip_gradients({0.1, 0.1}, 1.0) == std::vector<double>{0.1, 0.1});
    CHECK(clip_gradients({0.0, 0.0}, 1.0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("clip_gradients preserves direction and bounds the norm") {
    std::vector<double> g = {5.0, -2.0, 7.5, 0.25};
    std::vector<double> c = clip_gradients(g, 0.9);
    double norm = 0.0;
    for (double v : c) norm += v * v;
    CHECK(std::sqrt(norm) <= 0.9 + 1e-12);
    CHECK(c[0] / g[0] == doctest::Approx(c[2] / g[2]));
    CHECK(c[1] / g[1] == doctest::Approx(c[3] / g[3]));
}

TEST_CASE("adam first step magnitude is about the learning rate") {
    AdamState state(2, 1e-3);
    std::vector<double> params = {1.0, -1.0};
    adam_step(state, params, {0.3, -40.0});
    CHECK(params[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-4));
    CHECK(params[1] == doctest::Approx(-1.0 + 1e-3).epsilon(1e-4));
    CHECK(state.step_count == 1);
}

TEST_CASE("adam zero gradient is a parameter no-op") {
    AdamState state(2, 1e-3);
    std::vector<double> params = {0.5, 0.5};
    adam_step(state, params, {0.0, 0.0});
    CHECK(params == std::vector<double>{0.5, 0.5});
    CHECK(state.step_count == 1);
}

TEST_CASE("adam descends a quadratic") {
    AdamState state(1, 1e-2);
    std::vector<double> params = {1.0};
    double prev = params[0] * params[0];
    for (int i = 0; i < 2; ++i) {
        adam_step(state, params, {2.0 * params[0]});
        const double f = params[0] * params[0];
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("early stopper: monotone improvement never stops") {
    EarlyStopper stopper(5);
    CHECK(stopper.update(1.0, {1.0}) == StopDecision::kContinue);
    CHECK(stopper.update(0.9, {2.0}) == StopDecision::kContinue);
    CHECK(stopper.update(0.8, {3.0}) == StopDecision::kContinue);
    CHECK(stopper.best_loss() == 0.8);
    CHECK(stopper.best_snapshot() == std::vector<double>{3.0});
}

TEST_CASE("early stopper: patience 5 stops at the sixth flat epoch") {
    EarlyStopper stopper(5);
    CHECK(stopper.update(1.0, {42.0}) == StopDecision::kContinue);
    for (int i = 0; i < 5; ++i) CHECK(stopper.update(1.0, {0.0}) == StopDecision::kContinue);
    CHECK(stopper.update(1.0, {0.0}) == StopDecision::kStop);
    CHECK(stopper.best_snapshot() == std::vector<double>{42.0});
}

TEST_CASE("early stopper: improvement resets the counter") {
    EarlyStopper stopper(5);
    stopper.update(1.0, {1.0});
    stopper.update(1.1, {2.0});
    CHECK(stopper.epochs_since_best() == 1);
    CHECK(stopper.update(0.5, {3.0}) == StopDecision::kContinue);
    CHECK(stopper.epochs_since_best() == 0);
    CHECK(stopper.best_loss() == 0.5);
}
