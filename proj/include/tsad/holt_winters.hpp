#pragma once

#include <cstddef>
#include <vector>

namespace tsad {

// Additive exponential smoothing with level, trend, and seasonal state.
// period = 1 degenerates to Holt's linear method (gamma frozen at 0).
struct HoltWintersModel {
    double alpha = 0.5;
    double beta = 0.1;
    double gamma = 0.1;
    std::size_t period = 1;
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonals;  // ring buffer, length = period
    std::size_t steps_seen = 0;     // observations absorbed since init
    double train_mse = 0.0;
};

// Pre-recursion state: level from the first cycle mean, trend from the
// first-to-second cycle mean difference, seasonals from first-cycle
// deviations. Smoothing coefficients are left at their defaults.
HoltWintersModel hw_initial_state(const std::vector<double>& train, std::size_t period);

HoltWintersModel hw_fit(const std::vector<double>& train, std::size_t period);

// Walk-forward one-step forecasts: emit, then absorb the true observation.
// Mutates the model state.
std::vector<double> hw_predict_one_step(HoltWintersModel& model,
                                        const std::vector<double>& observed);

}  // namespace tsad
