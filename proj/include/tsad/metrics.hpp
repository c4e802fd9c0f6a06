#pragma once

#include <cstddef>
#include <vector>

namespace tsad {

struct ForecastMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    double mse = 0.0;
    double mape = 0.0;            // percentage scale
    std::size_t mape_excluded = 0;  // near-zero actuals left out of MAPE
    double pcc = 0.0;
    double euclid = 0.0;
    double dtw = 0.0;
    double cbd = 0.0;  // 1 - pcc
    double r2 = 0.0;
    bool pcc_degenerate = false;
};

struct DetectionMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double fpr = 0.0;
    double auc = 0.5;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool fpr_degenerate = false;
    bool auc_degenerate = false;
};

ForecastMetrics forecast_metrics(const std::vector<double>& actual,
                                 const std::vector<double>& predicted);

// Unconstrained DTW with absolute-difference local cost.
double dtw_distance(const std::vector<double>& a, const std::vector<double>& b);

// Rank (Mann-Whitney) formulation; ties count one half.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& truth,
               bool* degenerate = nullptr);

DetectionMetrics detection_metrics(const std::vector<bool>& pred,
                                   const std::vector<bool>& truth,
                                   const std::vector<double>& scores);

}  // namespace tsad
