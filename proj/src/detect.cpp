#include "tsad/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsad {

namespace {

double log_gauss_density(double r, double mu, double sigma) {
    const double z = (r - mu) / sigma;
    return -0.5 * std::log(2.0 * M_PI * sigma * sigma) - 0.5 * z * z;
}

}  // namespace

std::string to_string(DetectorMethod method) {
    switch (method) {
        case DetectorMethod::kZtest: return "ztest";
        case DetectorMethod::kGaussian: return "gaussian";
        case DetectorMethod::kPercentile: return "percentile";
        case DetectorMethod::kIqr: return "iqr";
    }
    return "?";
}

DetectorMethod detector_from_string(const std::string& name) {
    if (name == "ztest") return DetectorMethod::kZtest;
    if (name == "gaussian") return DetectorMethod::kGaussian;
    if (name == "percentile") return DetectorMethod::kPercentile;
    if (name == "iqr") return DetectorMethod::kIqr;
    throw std::invalid_argument("unknown detector: " + name);
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile rank outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ResidualSeries compute_residuals(const std::vector<double>& actual,
                                 const std::vector<double>& predicted,
                                 std::size_t first_position) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("residual length mismatch");
    ResidualSeries rs;
    rs.signed_values.resize(actual.size());
    rs.positions.resize(actual.size());
    for (std::size_t j = 0; j < actual.size(); ++j) {
        rs.signed_values[j] = actual[j] - predicted[j];
        rs.positions[j] = first_position + j;
    }
    return rs;
}

DetectorParams fit_detector(DetectorMethod method, const ResidualSeries& reference) {
    const std::vector<double>& r = reference.signed_values;
    if (r.size() < 20) throw std::invalid_argument("too few reference residuals");

    DetectorParams p;
    p.method = method;
    p.mu = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - p.mu) * (v - p.mu);
    p.sigma = std::sqrt(ss / static_cast<double>(r.size()));
    if (p.sigma < 1e-12) {
        p.sigma = 1e-12;
        p.degenerate = true;
    }

    std::vector<double> log_densities(r.size()), abs_r(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        log_densities[j] = log_gauss_density(r[j], p.mu, p.sigma);
        abs_r[j] = std::abs(r[j]);
    }
    p.log_tau = percentile(std::move(log_densities), 0.01);
    p.q95 = percentile(std::move(abs_r), 0.95);
    p.q1 = percentile(r, 0.25);
    p.q3 = percentile(r, 0.75);
    p.iqr = p.q3 - p.q1;
    return p;
}

DetectionOutput apply_detector(const DetectorParams& params, const ResidualSeries& test) {
    const std::vector<double>& r = test.signed_values;
    DetectionOutput out;
    out.labels.resize(r.size());
    out.scores.resize(r.size());

    const double lo_fence = params.q1 - 1.5 * params.iqr;
    const double hi_fence = params.q3 + 1.5 * params.iqr;

    for (std::size_t j = 0; j < r.size(); ++j) {
        const double z = (r[j] - params.mu) / params.sigma;
        out.scores[j] = std::abs(z);
        switch (params.method) {
            case DetectorMethod::kZtest:
                out.labels[j] = std::abs(z) > params.k;
                break;
            case DetectorMethod::kGaussian:
                out.labels[j] = log_gauss_density(r[j], params.mu, params.sigma) < params.log_tau;
                break;
            case DetectorMethod::kPercentile:
                out.labels[j] = std::abs(r[j]) > params.q95;
                break;
            case DetectorMethod::kIqr:
                out.labels[j] = r[j] < lo_fence || r[j] > hi_fence;
                break;
        }
    }
    return out;
}

}  // namespace tsad
