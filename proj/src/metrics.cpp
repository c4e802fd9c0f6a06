#include "tsad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsad {

ForecastMetrics forecast_metrics(const std::vector<double>& actual,
                                 const std::vector<double>& predicted) {
    const std::size_t n = actual.size();
    if (n != predicted.size()) throw std::invalid_argument("forecast metric length mismatch");
    if (n < 2) throw std::invalid_argument("forecast metrics need at least 2 points");

    ForecastMetrics m;
    double abs_sum = 0.0, sq_sum = 0.0, mape_sum = 0.0;
    std::size_t mape_n = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double e = actual[j] - predicted[j];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        if (std::abs(actual[j]) >= 1e-8) {
            mape_sum += std::abs(e / actual[j]);
            ++mape_n;
        } else {
            ++m.mape_excluded;
        }
    }
    const double dn = static_cast<double>(n);
    m.mae = abs_sum / dn;
    m.mse = sq_sum / dn;
    m.rmse = std::sqrt(m.mse);
    m.euclid = std::sqrt(sq_sum);
    m.mape = mape_n > 0 ? 100.0 * mape_sum / static_cast<double>(mape_n) : 0.0;

    const double mean_a = std::accumulate(actual.begin(), actual.end(), 0.0) / dn;
    const double mean_p = std::accumulate(predicted.begin(), predicted.end(), 0.0) / dn;
    double cov = 0.0, var_a = 0.0, var_p = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double da = actual[j] - mean_a;
        const double dp = predicted[j] - mean_p;
        cov += da * dp;
        var_a += da * da;
        var_p += dp * dp;
    }
    if (var_a < 1e-300 || var_p < 1e-300) {
        m.pcc = 0.0;
        m.pcc_degenerate = true;
    } else {
        m.pcc = cov / (std::sqrt(var_a) * std::sqrt(var_p));
    }
    m.cbd = 1.0 - m.pcc;
    m.r2 = (var_a < 1e-300) ? 0.0 : 1.0 - sq_sum / var_a;
    m.dtw = dtw_distance(actual, predicted);
    return m;
}

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("dtw of empty sequence");
    const std::size_t n = a.size(), m = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Rolling rows of the accumulated-cost table.
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double cost = std::abs(a[i - 1] - b[j - 1]);
            cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& truth,
               bool* degenerate) {
    if (scores.size() != truth.size()) throw std::invalid_argument("auc length mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (bool t : truth)
        if (t) ++n_pos;
    const std::size_t n_neg = n - n_pos;
    if (degenerate) *degenerate = false;
    if (n_pos == 0 || n_neg == 0) {
        if (degenerate) *degenerate = true;
        return 0.5;
    }

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over ties, then the Mann-Whitney statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (truth[idx[k]]) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos -
                     static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

DetectionMetrics detection_metrics(const std::vector<bool>& pred,
                                   const std::vector<bool>& truth,
                                   const std::vector<double>& scores) {
    const std::size_t n = pred.size();
    if (truth.size() != n || scores.size() != n)
        throw std::invalid_argument("detection metric length mismatch");

    DetectionMetrics m;
    for (std::size_t j = 0; j < n; ++j) {
        if (pred[j] && truth[j]) ++m.tp;
        else if (pred[j] && !truth[j]) ++m.fp;
        else if (!pred[j] && truth[j]) ++m.fn;
        else ++m.tn;
    }
    if (m.tp + m.fp > 0)
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    else
        m.precision_degenerate = true;
    if (m.tp + m.fn > 0)
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    else
        m.recall_degenerate = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    if (m.fp + m.tn > 0)
        m.fpr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
    else
        m.fpr_degenerate = true;
    m.accuracy = n > 0 ? static_cast<double>(m.tp + m.tn) / static_cast<double>(n) : 0.0;
    m.auc = roc_auc(scores, truth, &m.auc_degenerate);
    return m;
}

}  // namespace tsad
