#include "tsad/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsad {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double tricube(double u) {
    if (u >= 1.0) return 0.0;
    double t = 1.0 - u * u * u;
    return t * t * t;
}

// Centered moving average, truncated at the boundaries to keep length.
std::vector<double> centered_ma(const std::vector<double>& x, std::size_t len) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    const std::ptrdiff_t left = static_cast<std::ptrdiff_t>((len - 1) / 2);
    const std::ptrdiff_t right = static_cast<std::ptrdiff_t>(len / 2);
    for (std::size_t j = 0; j < n; ++j) {
        std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(j) - left);
        std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                                     static_cast<std::ptrdiff_t>(j) + right);
        double sum = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) sum += x[static_cast<std::size_t>(k)];
        out[j] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::size_t clamp_span(std::size_t span, std::size_t n) {
    if (span > n) span = n;
    if (span % 2 == 0) --span;
    return span;
}

}  // namespace

std::pair<std::vector<double>, RepairReport> repair_missing(const std::vector<double>& values) {
    const std::size_t n = values.size();
    RepairReport report;
    std::vector<double> out(values);

    std::size_t missing = 0;
    for (double v : values)
        if (std::isnan(v)) ++missing;
    if (missing == n || n == 0) throw std::invalid_argument("all values missing");
    report.missing_fraction = static_cast<double>(missing) / static_cast<double>(n);
    report.flagged = report.missing_fraction > 0.10;

    std::size_t j = 0;
    while (j < n) {
        if (!std::isnan(out[j])) {
            ++j;
            continue;
        }
        std::size_t gap_end = j;
        while (gap_end < n && std::isnan(out[gap_end])) ++gap_end;
        const std::size_t gap = gap_end - j;

        if (j == 0) {
            // No left anchor: back-fill from the first observed value.
            for (std::size_t k = 0; k < gap_end; ++k) out[k] = out[gap_end];
            report.interpolated += gap;
        } else if (gap_end == n) {
            for (std::size_t k = j; k < n; ++k) out[k] = out[j - 1];
            report.filled_forward += gap;
        } else if (gap < 5) {
            for (std::size_t k = j; k < gap_end; ++k) out[k] = out[j - 1];
            report.filled_forward += gap;
        } else {
            const double a = out[j - 1];
            const double b = out[gap_end];
            const double step = (b - a) / static_cast<double>(gap + 1);
            for (std::size_t k = j; k < gap_end; ++k)
                out[k] = a + step * static_cast<double>(k - j + 1);
            report.interpolated += gap;
        }
        j = gap_end;
    }
    return {out, report};
}

NormParams zscore_fit(const std::vector<double>& train_values) {
    if (train_values.size() < 2)
        throw std::invalid_argument("zscore_fit needs at least 2 values");
    NormParams p;
    p.mean = mean_of(train_values);
    double ss = 0.0;
    for (double v : train_values) ss += (v - p.mean) * (v - p.mean);
    p.std = std::sqrt(ss / static_cast<double>(train_values.size()));
    if (p.std < 1e-12) {
        p.std = 1.0;
        p.degenerate = true;
    }
    return p;
}

std::vector<double> zscore_apply(const NormParams& params, const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j)
        out[j] = (values[j] - params.mean) / params.std;
    return out;
}

std::vector<double> zscore_invert(const NormParams& params, const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j)
        out[j] = values[j] * params.std + params.mean;
    return out;
}

double autocorrelation(const std::vector<double>& values, std::size_t lag) {
    const std::size_t n = values.size();
    if (lag >= n) return 0.0;
    const double m = mean_of(values);
    double denom = 0.0;
    for (double v : values) denom += (v - m) * (v - m);
    if (denom < 1e-300) return 0.0;
    double num = 0.0;
    for (std::size_t j = lag; j < n; ++j) num += (values[j] - m) * (values[j - lag] - m);
    return num / denom;
}

std::size_t default_max_lag(std::size_t n) {
    return std::min<std::size_t>(n / 2, 400);
}

std::optional<std::size_t> detect_period(const std::vector<double>& values,
                                         std::size_t max_lag) {
    if (max_lag < 2 || values.size() < 4) return std::nullopt;
    if (max_lag >= values.size()) max_lag = values.size() - 1;

    const double m = mean_of(values);
    double var = 0.0;
    for (double v : values) var += (v - m) * (v - m);
    if (var < 1e-300) return std::nullopt;  // constant series, ACF undefined

    std::vector<double> acf(max_lag + 1, 0.0);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) acf[lag] = autocorrelation(values, lag);

    for (std::size_t lag = 2; lag <= max_lag; ++lag) {
        if (acf[lag] <= 0.3) continue;
        const bool rises = acf[lag] >= acf[lag - 1];
        const bool falls = (lag == max_lag) || acf[lag] >= acf[lag + 1];
        if (rises && falls) return lag;
    }
    return std::nullopt;
}

std::vector<double> loess_smooth(const std::vector<double>& values, std::size_t span,
                                 int degree) {
    const std::size_t n = values.size();
    if (n < 3) throw std::invalid_argument("loess_smooth needs at least 3 values");
    if (degree != 0 && degree != 1) throw std::invalid_argument("loess degree must be 0 or 1");
    span = clamp_span(span, n);
    if (span < 3) span = 3;

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Contiguous window of the span nearest neighbors.
        std::size_t lo = (i > span / 2) ? i - span / 2 : 0;
        if (lo + span > n) lo = n - span;
        const std::size_t hi = lo + span - 1;

        double dmax = std::max<double>(static_cast<double>(i - lo), static_cast<double>(hi - i));
        const double denom = dmax + 1.0;  // keeps the farthest neighbor's weight positive

        if (degree == 0) {
            double wsum = 0.0, vsum = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) {
                const double d = std::abs(static_cast<double>(k) - static_cast<double>(i));
                const double w = tricube(d / denom);
                wsum += w;
                vsum += w * values[k];
            }
            out[i] = vsum / wsum;
        } else {
            // Weighted linear fit in the index coordinate, evaluated at i.
            double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) {
                const double x = static_cast<double>(k) - static_cast<double>(i);
                const double w = tricube(std::abs(x) / denom);
                sw += w;
                sx += w * x;
                sy += w * values[k];
                sxx += w * x * x;
                sxy += w * x * values[k];
            }
            const double det = sw * sxx - sx * sx;
            if (std::abs(det) < 1e-300) {
                out[i] = sy / sw;
            } else {
                out[i] = (sxx * sy - sx * sxy) / det;  // intercept at x = 0
            }
        }
    }
    return out;
}

StlComponents stl_decompose(const std::vector<double>& values, std::size_t period) {
    const std::size_t n = values.size();
    if (period < 2) throw std::invalid_argument("stl period must be >= 2");
    if (n < 2 * period) throw std::invalid_argument("series too short for stl period");

    constexpr int kInnerIterations = 2;
    constexpr std::size_t kSeasonalSpan = 7;

    // Cleveland's recommended trend span for the default seasonal smoother.
    const double raw = 1.5 * static_cast<double>(period) / (1.0 - 1.5 / 7.0);
    std::size_t trend_span = static_cast<std::size_t>(std::ceil(raw));
    if (trend_span % 2 == 0) ++trend_span;
    if (trend_span < 3) trend_span = 3;

    StlComponents comp;
    comp.period = period;
    comp.trend.assign(n, 0.0);
    comp.seasonal.assign(n, 0.0);

    std::vector<double> detrended(n), cycle(n), phase_values, phase_smooth;
    for (int iter = 0; iter < kInnerIterations; ++iter) {
        for (std::size_t j = 0; j < n; ++j) detrended[j] = values[j] - comp.trend[j];

        // Smooth each cycle-subseries.
        for (std::size_t phase = 0; phase < period; ++phase) {
            phase_values.clear();
            for (std::size_t j = phase; j < n; j += period) phase_values.push_back(detrended[j]);
            if (phase_values.size() < 3) {
                phase_smooth = phase_values;
            } else {
                phase_smooth = loess_smooth(phase_values, kSeasonalSpan, 0);
            }
            std::size_t k = 0;
            for (std::size_t j = phase; j < n; j += period) cycle[j] = phase_smooth[k++];
        }

        // Low-pass filter the cycle estimate and subtract it to deseasonalize.
        std::vector<double> low = centered_ma(cycle, period);
        low = centered_ma(low, period);
        low = centered_ma(low, 3);
        low = loess_smooth(low, trend_span, 1);
        for (std::size_t j = 0; j < n; ++j) comp.seasonal[j] = cycle[j] - low[j];

        // Re-center: each full cycle of the seasonal sums to zero.
        const std::size_t full_cycles = n / period;
        double last_mean = 0.0;
        for (std::size_t c = 0; c < full_cycles; ++c) {
            double s = 0.0;
            for (std::size_t j = c * period; j < (c + 1) * period; ++j) s += comp.seasonal[j];
            last_mean = s / static_cast<double>(period);
            for (std::size_t j = c * period; j < (c + 1) * period; ++j)
                comp.seasonal[j] -= last_mean;
        }
        for (std::size_t j = full_cycles * period; j < n; ++j) comp.seasonal[j] -= last_mean;

        std::vector<double> deseasonalized(n);
        for (std::size_t j = 0; j < n; ++j) deseasonalized[j] = values[j] - comp.seasonal[j];
        comp.trend = loess_smooth(deseasonalized, trend_span, 1);
    }

    comp.residual.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        comp.residual[j] = values[j] - comp.trend[j] - comp.seasonal[j];
    return comp;
}

}  // namespace tsad
