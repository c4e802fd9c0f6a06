#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace tsad {

// Z-score parameters fitted on the training segment only.
struct NormParams {
    double mean = 0.0;
    double std = 1.0;
    bool degenerate = false;  // constant input, std fell back to 1
};

struct RepairReport {
    std::size_t filled_forward = 0;
    std::size_t interpolated = 0;
    double missing_fraction = 0.0;
    bool flagged = false;  // missing_fraction > 0.10
};

// Additive decomposition x = trend + seasonal + residual.
struct StlComponents {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    std::size_t period = 0;
};

// Gaps of fewer than 5 consecutive NaNs are forward-filled, longer gaps
// linearly interpolated. Leading NaNs are back-filled from the first
// observed value (counted as interpolated), trailing NaNs forward-filled.
std::pair<std::vector<double>, RepairReport> repair_missing(const std::vector<double>& values);

NormParams zscore_fit(const std::vector<double>& train_values);
std::vector<double> zscore_apply(const NormParams& params, const std::vector<double>& values);
std::vector<double> zscore_invert(const NormParams& params, const std::vector<double>& values);

// Sample autocorrelation at the given lag.
double autocorrelation(const std::vector<double>& values, std::size_t lag);

// First local ACF maximum over lags 2..max_lag exceeding 0.3, or nothing.
std::optional<std::size_t> detect_period(const std::vector<double>& values, std::size_t max_lag);
std::size_t default_max_lag(std::size_t n);

// Locally weighted polynomial smoother with tricube weights over the
// `span` nearest neighbors; degree 0 or 1.
std::vector<double> loess_smooth(const std::vector<double>& values, std::size_t span, int degree);

StlComponents stl_decompose(const std::vector<double>& values, std::size_t period);

}  // namespace tsad
