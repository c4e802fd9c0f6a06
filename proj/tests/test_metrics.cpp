#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "tsad/metrics.hpp"

using namespace tsad;

namespace {

// Exhaustive alignment-path search, tractable only for tiny sequences.
double dtw_brute(const std::vector<double>& a, const std::vector<double>& b) {
    struct State {
        std::size_t i, j;
        double cost;
    };
    double best = 1e300;
    std::vector<State> stack = {{0, 0, std::abs(a[0] - b[0])}};
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        if (s.cost >= best) continue;
        if (s.i == a.size() - 1 && s.j == b.size() - 1) {
            best = std::min(best, s.cost);
            continue;
        }
        if (s.i + 1 < a.size())
            stack.push_back({s.i + 1, s.j, s.cost + std::abs(a[s.i + 1] - b[s.j])});
        if (s.j + 1 < b.size())
            stack.push_back({s.i, s.j + 1, s.cost + std::abs(a[s.i] - b[s.j + 1])});
        if (s.i + 1 < a.size() && s.j + 1 < b.size())
            stack.push_back({s.i + 1, s.j + 1, s.cost + std::abs(a[s.i + 1] - b[s.j + 1])});
    }
    return best;
}

}  // namespace

TEST_CASE("forecast metrics on a small hand-checked example") {
    // errors: 1, -1, 2, 0 -> mae 1, mse 1.5
    std::vector<double> actual = {3.0, 1.0, 4.0, 2.0};
    std::vector<double> pred = {2.0, 2.0, 2.0, 2.0};
    ForecastMetrics m = forecast_metrics(actual, pred);
    CHECK(m.mae == doctest::Approx(1.0));
    CHECK(m.mse == doctest::Approx(1.5));
    CHECK(m.rmse == doctest::Approx(std::sqrt(1.5)));
    // mean(actual)=2.5, ss_tot = 0.25+2.25+2.25+0.25 = 5, ss_res = 6
    CHECK(m.r2 == doctest::Approx(1.0 - 6.0 / 5.0));
    // mape terms: 1/3, 1/1, 2/4, 0/2 -> mean * 100
    CHECK(m.mape == doctest::Approx(100.0 * (1.0 / 3 + 1.0 + 0.5 + 0.0) / 4.0));
    CHECK(m.mape_excluded == 0);
    CHECK(m.euclid == doctest::Approx(std::sqrt(6.0)));
    CHECK(m.cbd == doctest::Approx(1.0 - m.pcc));
}

TEST_CASE("perfect forecast gives zero errors and r2 of one") {
    std::vector<double> a = {1.0, 5.0, -2.0, 7.0};
    ForecastMetrics m = forecast_metrics(a, a);
    CHECK(m.mae == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.dtw == 0.0);
    CHECK(m.r2 == doctest::Approx(1.0));
    CHECK(m.pcc == doctest::Approx(1.0));
}

TEST_CASE("mape skips near-zero actuals and counts them") {
    std::vector<double> actual = {0.0, 1e-12, 2.0, 4.0};
    std::vector<double> pred = {1.0, 1.0, 1.0, 2.0};
    ForecastMetrics m = forecast_metrics(actual, pred);
    CHECK(m.mape_excluded == 2);
    CHECK(m.mape == doctest::Approx(100.0 * (0.5 + 0.5) / 2.0));
}

TEST_CASE("pcc is invariant to positive affine maps and flips sign on negation") {
    std::vector<double> a = test_util::gaussian_noise(200, 3);
    std::vector<double> b = test_util::gaussian_noise(200, 4);
    ForecastMetrics base = forecast_metrics(a, b);
    std::vector<double> b2 = b, b3 = b;
    for (double& x : b2) x = 2.5 * x + 7.0;
    for (double& x : b3) x = -x;
    CHECK(forecast_metrics(a, b2).pcc == doctest::Approx(base.pcc).epsilon(1e-9));
    CHECK(forecast_metrics(a, b3).pcc == doctest::Approx(-base.pcc).epsilon(1e-9));
}

TEST_CASE("constant actuals make pcc degenerate") {
    ForecastMetrics m = forecast_metrics({2.0, 2.0, 2.0, 2.0}, {1.0, 2.0, 3.0, 4.0});
    CHECK(m.pcc_degenerate);
    CHECK(m.pcc == 0.0);
    CHECK(m.cbd == doctest::Approx(1.0));
}

TEST_CASE("forecast_metrics validates inputs") {
    CHECK_THROWS(forecast_metrics({1.0}, {1.0, 2.0}));
    CHECK_THROWS(forecast_metrics({}, {}));
}

TEST_CASE("dtw on hand-worked examples") {
    CHECK(dtw_distance({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(2.0));
    // Duplicated points align for free.
    CHECK(dtw_distance({1.0, 2.0, 3.0}, {1.0, 1.0, 2.0, 2.0, 3.0, 3.0}) == doctest::Approx(0.0));
    CHECK(dtw_distance({5.0}, {1.0, 2.0}) == doctest::Approx(4.0 + 3.0));
    CHECK(dtw_distance({1.0, 3.0, 2.0}, {1.0, 3.0, 2.0}) == doctest::Approx(0.0));
}

TEST_CASE("dtw matches exhaustive search on random short sequences") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(1, 6);
    std::uniform_int_distribution<int> val(0, 2);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a(len(rng)), b(len(rng));
        for (double& x : a) x = double(val(rng));
        for (double& x : b) x = double(val(rng));
        CHECK(dtw_distance(a, b) == doctest::Approx(dtw_brute(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("dtw is symmetric and never exceeds the lockstep cost") {
    std::vector<double> a = test_util::sine_wave(40, 10.0);
    std::vector<double> b = test_util::gaussian_noise(40, 17);
    CHECK(dtw_distance(a, b) == doctest::Approx(dtw_distance(b, a)));
    double lockstep = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) lockstep += std::abs(a[i] - b[i]);
    CHECK(dtw_distance(a, b) <= lockstep + 1e-12);
}

TEST_CASE("roc auc rank statistic") {
    SUBCASE("perfect separation") {
        CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {false, false, true, true}) == doctest::Approx(1.0));
        CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {false, false, true, true}) == doctest::Approx(0.0));
    }
    SUBCASE("ties contribute one half") {
        CHECK(roc_auc({0.5, 0.5}, {false, true}) == doctest::Approx(0.5));
        // pairs: (0.3 vs 0.5 win), (0.3 vs 0.3 tie) -> (1 + 0.5)/2
        CHECK(roc_auc({0.3, 0.5, 0.3}, {false, true, true}) == doctest::Approx(0.75));
    }
    SUBCASE("single-class truth is degenerate") {
        bool degenerate = false;
        CHECK(roc_auc({0.1, 0.9}, {true, true}, &degenerate) == doctest::Approx(0.5));
        CHECK(degenerate);
        degenerate = false;
        roc_auc({0.1, 0.9}, {false, false}, &degenerate);
        CHECK(degenerate);
    }
    SUBCASE("random scores sit near one half") {
        std::vector<double> scores = test_util::gaussian_noise(4000, 31);
        std::vector<bool> truth(4000);
        std::mt19937_64 rng(7);
        for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = (rng() & 1) != 0;
        CHECK(roc_auc(scores, truth) == doctest::Approx(0.5).epsilon(0.05));
    }
    SUBCASE("invariant under permutation") {
        std::vector<double> scores = {0.9, 0.1, 0.5, 0.7, 0.3};
        std::vector<bool> truth = {true, false, false, true, false};
        const double base = roc_auc(scores, truth);
        std::vector<std::size_t> order = {3, 0, 4, 1, 2};
        std::vector<double> s2;
        std::vector<bool> t2;
        for (std::size_t i : order) {
            s2.push_back(scores[i]);
            t2.push_back(truth[i]);
        }
        CHECK(roc_auc(s2, t2) == doctest::Approx(base));
    }
}

TEST_CASE("detection metrics confusion counts and rates") {
    //            pred:  1  1  0  0  1  0
    //            truth: 1  0  1  0  1  0
    std::vector<bool> pred = {true, true, false, false, true, false};
    std::vector<bool> truth = {true, false, true, false, true, false};
    std::vector<double> scores = {0.9, 0.8, 0.2, 0.1, 0.7, 0.3};
    DetectionMetrics m = detection_metrics(pred, truth, scores);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.tn == 2);
    CHECK(m.fn == 1);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));
    CHECK(m.fpr == doctest::Approx(1.0 / 3.0));
    CHECK_FALSE(m.precision_degenerate);
    CHECK_FALSE(m.auc_degenerate);
}

TEST_CASE("zero denominators report zero with a flag") {
    SUBCASE("no predicted positives") {
        DetectionMetrics m =
            detection_metrics({false, false}, {true, false}, {0.1, 0.2});
        CHECK(m.precision == 0.0);
        CHECK(m.precision_degenerate);
        CHECK(m.f1 == 0.0);
    }
    SUBCASE("no true positives in truth") {
        DetectionMetrics m =
            detection_metrics({true, false}, {false, false}, {0.9, 0.1});
        CHECK(m.recall == 0.0);
        CHECK(m.recall_degenerate);
        CHECK(m.auc_degenerate);
    }
    SUBCASE("all-positive truth leaves fpr degenerate") {
        DetectionMetrics m = detection_metrics({true, true}, {true, true}, {0.9, 0.8});
        CHECK(m.fpr == 0.0);
        CHECK(m.fpr_degenerate);
        CHECK(m.recall == doctest::Approx(1.0));
    }
}

TEST_CASE("detection metrics validate input lengths") {
    CHECK_THROWS(detection_metrics({true}, {true, false}, {0.5, 0.5}));
    CHECK_THROWS(detection_metrics({true}, {true}, {}));
}
