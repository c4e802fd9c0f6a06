#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsad {

struct ResidualSeries {
    std::vector<double> signed_values;  // r = actual - predicted
    std::vector<std::size_t> positions;  // alignment into the source series
};

enum class DetectorMethod { kZtest, kGaussian, kPercentile, kIqr };

std::string to_string(DetectorMethod method);
DetectorMethod detector_from_string(const std::string& name);

// All statistics are populated at fit time; only the ones relevant to
// `method` are consulted when applying.
struct DetectorParams {
    DetectorMethod method = DetectorMethod::kZtest;
    double mu = 0.0;
    double sigma = 1.0;
    double k = 3.0;              // z-test threshold
    double log_tau = 0.0;        // 1st-percentile log likelihood cutoff
    double q95 = 0.0;            // 95th percentile of |r|
    double q1 = 0.0, q3 = 0.0, iqr = 0.0;
    bool degenerate = false;     // constant residuals, sigma floored
};

struct DetectionOutput {
    std::vector<bool> labels;
    std::vector<double> scores;  // standardized absolute residual
};

// Linear interpolation between closest order statistics; p in [0,1].
double percentile(std::vector<double> values, double p);

ResidualSeries compute_residuals(const std::vector<double>& actual,
                                 const std::vector<double>& predicted,
                                 std::size_t first_position = 0);

DetectorParams fit_detector(DetectorMethod method, const ResidualSeries& reference);

DetectionOutput apply_detector(const DetectorParams& params, const ResidualSeries& test);

}  // namespace tsad
