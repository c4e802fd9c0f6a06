#include "tsad/holt_winters.hpp"

#include <cmath>
#include <stdexcept>

#include "tsad/optim.hpp"

namespace tsad {

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double cycle_mean(const std::vector<double>& v, std::size_t start, std::size_t len) {
    double s = 0.0;
    for (std::size_t j = start; j < start + len; ++j) s += v[j];
    return s / static_cast<double>(len);
}

HoltWintersModel initial_state(const std::vector<double>& train, std::size_t period) {
    HoltWintersModel m;
    m.period = period;
    const double mean1 = cycle_mean(train, 0, period);
    const double mean2 = cycle_mean(train, period, period);
    m.level = mean1;
    m.trend = (mean2 - mean1) / static_cast<double>(period);
    m.seasonals.resize(period);
    for (std::size_t k = 0; k < period; ++k) m.seasonals[k] = train[k] - mean1;
    if (period == 1) m.seasonals[0] = 0.0;
    return m;
}

double hw_step(HoltWintersModel& m, double x) {
    const std::size_t phase = m.steps_seen % m.period;
    const double s = m.seasonals[phase];
    const double forecast = m.level + m.trend + s;
    const double new_level = m.alpha * (x - s) + (1.0 - m.alpha) * (m.level + m.trend);
    m.trend = m.beta * (new_level - m.level) + (1.0 - m.beta) * m.trend;
    m.seasonals[phase] = m.gamma * (x - new_level) + (1.0 - m.gamma) * s;
    m.level = new_level;
    ++m.steps_seen;
    return forecast;
}

double run_mse(HoltWintersModel m, const std::vector<double>& train) {
    double sse = 0.0;
    for (double x : train) {
        const double e = x - hw_step(m, x);
        sse += e * e;
    }
    return sse / static_cast<double>(train.size());
}

// Zero-mean seasonal indices; drift between level and seasonals cancels
// in the forecast, re-centering just keeps the components identified.
void recenter_seasonals(HoltWintersModel& m) {
    double mean = 0.0;
    for (double s : m.seasonals) mean += s;
    mean /= static_cast<double>(m.period);
    for (double& s : m.seasonals) s -= mean;
    m.level += mean;
}

}  // namespace

HoltWintersModel hw_initial_state(const std::vector<double>& train, std::size_t period) {
    if (period < 1 || train.size() < 2 * period || train.size() < 2)
        throw std::invalid_argument("hw_initial_state needs at least two full cycles");
    return initial_state(train, period);
}

HoltWintersModel hw_fit(const std::vector<double>& train, std::size_t period) {
    if (period < 1) throw std::invalid_argument("hw_fit period must be >= 1");
    if (train.size() < 2 * period || train.size() < 2)
        throw std::invalid_argument("hw_fit needs at least two full cycles");

    const bool seasonal = period > 1;
    const HoltWintersModel init = initial_state(train, period);

    auto objective = [&](const std::vector<double>& u) {
        HoltWintersModel m = init;
        m.alpha = logistic(u[0]);
        m.beta = logistic(u[1]);
        m.gamma = seasonal ? logistic(u[2]) : 0.0;
        return run_mse(m, train);
    };

    SimplexOptions opts;
    opts.max_iters = 400;
    std::vector<double> u0 = seasonal ? std::vector<double>{-0.85, -2.2, -2.2}
                                      : std::vector<double>{-0.85, -2.2};
    auto [u_best, mse] = nelder_mead(objective, u0, opts);

    HoltWintersModel model = init;
    model.alpha = logistic(u_best[0]);
    model.beta = logistic(u_best[1]);
    model.gamma = seasonal ? logistic(u_best[2]) : 0.0;
    model.train_mse = mse;
    for (double x : train) hw_step(model, x);
    recenter_seasonals(model);
    return model;
}

std::vector<double> hw_predict_one_step(HoltWintersModel& model,
                                        const std::vector<double>& observed) {
    std::vector<double> forecasts;
    forecasts.reserve(observed.size());
    for (double x : observed) forecasts.push_back(hw_step(model, x));
    return forecasts;
}

}  // namespace tsad
