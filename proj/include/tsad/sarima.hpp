#pragma once

#include <cstddef>
#include <vector>

namespace tsad {

// Model orders (p,d,q)x(P,D,Q)_m with p,q,P,Q in {0,1,2} and d,D in {0,1}.
struct SarimaOrders {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    std::size_t period = 1;

    SarimaOrders() = default;
    SarimaOrders(int p_, int d_, int q_, int P_, int D_, int Q_, std::size_t m);

    int param_count() const { return p + q + P + Q; }
};

struct SarimaModel {
    SarimaOrders orders;
    std::vector<double> ar;   // phi, length p
    std::vector<double> ma;   // theta, length q
    std::vector<double> sar;  // Phi, length P
    std::vector<double> sma;  // Theta, length Q
    double intercept = 0.0;   // mean of the differenced series
    double sigma2 = 0.0;
    double aic = 0.0;

    // Raw observations retained from the end of train, enough to invert
    // differencing and seed the ARMA recursion at prediction time.
    std::vector<double> raw_tail;
    std::vector<double> w_tail;    // mean-adjusted differenced history
    std::vector<double> eps_tail;  // one-step innovations
};

// Applies nabla^d nabla_m^D.
std::vector<double> difference(const std::vector<double>& x, int d, int D, std::size_t m);

SarimaModel sarima_fit(const std::vector<double>& train, const SarimaOrders& orders);

// AIC grid search over p,q,P,Q in {0,1,2}, d,D in {0,1}; ties broken by
// fewer parameters, then lexicographic order.
SarimaOrders sarima_select(const std::vector<double>& train, std::size_t period,
                           bool seasonal_terms = true);

// Walk-forward one-step forecasts; mutates the model's history tails.
std::vector<double> sarima_predict_one_step(SarimaModel& model,
                                            const std::vector<double>& observed);

// In-sample one-step forecasts over the training series (pre-sample terms
// zero), aligned with `train`; used for training-residual extraction.
std::vector<double> sarima_in_sample_forecasts(const SarimaModel& model,
                                               const std::vector<double>& train);

}  // namespace tsad
