#include "tsad/sarima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "tsad/optim.hpp"

namespace tsad {

namespace {

// Expanded predictive-form lag coefficients of phi(B)Phi(B^m) (AR) or
// theta(B)Theta(B^m) (MA): w_t = sum ar_full[i] w_{t-i} + e_t + sum ma_full[j] e_{t-j}.
std::vector<double> expand_ar(const std::vector<double>& phi, const std::vector<double>& sphi,
                              std::size_t m) {
    std::vector<double> full(phi.size() + m * sphi.size(), 0.0);
    for (std::size_t i = 0; i < phi.size(); ++i) full[i] = phi[i];
    for (std::size_t k = 0; k < sphi.size(); ++k) {
        full[m * (k + 1) - 1] += sphi[k];
        for (std::size_t i = 0; i < phi.size(); ++i)
            full[m * (k + 1) + i] -= phi[i] * sphi[k];
    }
    return full;
}

std::vector<double> expand_ma(const std::vector<double>& theta,
                              const std::vector<double>& stheta, std::size_t m) {
    std::vector<double> full(theta.size() + m * stheta.size(), 0.0);
    for (std::size_t j = 0; j < theta.size(); ++j) full[j] = theta[j];
    for (std::size_t k = 0; k < stheta.size(); ++k) {
        full[m * (k + 1) - 1] += stheta[k];
        for (std::size_t j = 0; j < theta.size(); ++j)
            full[m * (k + 1) + j] += theta[j] * stheta[k];
    }
    return full;
}

// Conditional sum of squares: innovations with zero pre-sample w and eps.
double css_sse(const std::vector<double>& w, const std::vector<double>& ar_full,
               const std::vector<double>& ma_full, std::vector<double>* eps_out = nullptr) {
    const std::size_t n = w.size();
    std::vector<double> eps(n, 0.0);
    double sse = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double pred = 0.0;
        for (std::size_t i = 0; i < ar_full.size() && i < t; ++i)
            pred += ar_full[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < ma_full.size() && j < t; ++j)
            pred += ma_full[j] * eps[t - 1 - j];
        eps[t] = w[t] - pred;
        sse += eps[t] * eps[t];
    }
    if (eps_out) *eps_out = std::move(eps);
    return sse;
}

struct CoeffSets {
    std::vector<double> ar, ma, sar, sma;
};

CoeffSets unpack(const std::vector<double>& u, const SarimaOrders& o) {
    CoeffSets c;
    std::size_t k = 0;
    auto take = [&](int count) {
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) v[i] = std::tanh(u[k++]);
        return v;
    };
    c.ar = take(o.p);
    c.ma = take(o.q);
    c.sar = take(o.P);
    c.sma = take(o.Q);
    return c;
}

// Contribution of retained raw history to undoing nabla^d nabla_m^D at the
// next step; raw holds the last d + m*D observations, most recent last.
double inversion_term(const std::vector<double>& raw, int d, int D, std::size_t m) {
    if (d == 0 && D == 0) return 0.0;
    if (d == 1 && D == 0) return raw.back();
    if (d == 0 && D == 1) return raw[raw.size() - m];
    return raw.back() + raw[raw.size() - m] - raw[raw.size() - m - 1];  // d=1, D=1
}

void push_tail(std::vector<double>& tail, double v) {
    if (tail.empty()) return;
    tail.erase(tail.begin());
    tail.push_back(v);
}

SarimaModel fit_impl(const std::vector<double>& train, const SarimaOrders& orders,
                     std::size_t nm_iters) {
    const std::size_t m = orders.period;
    std::vector<double> w = difference(train, orders.d, orders.D, m);
    if (w.size() < 20)
        throw std::invalid_argument("fewer than 20 effective observations after differencing");
    const double n_eff = static_cast<double>(w.size());

    SarimaModel model;
    model.orders = orders;
    model.intercept = std::accumulate(w.begin(), w.end(), 0.0) / n_eff;
    for (double& v : w) v -= model.intercept;

    const int dim = orders.param_count();
    double sse;
    std::vector<double> eps;
    if (dim == 0) {
        CoeffSets c;
        sse = css_sse(w, {}, {}, &eps);
        model.ar = c.ar;
    } else {
        auto objective = [&](const std::vector<double>& u) {
            CoeffSets c = unpack(u, orders);
            const double v = css_sse(w, expand_ar(c.ar, c.sar, m), expand_ma(c.ma, c.sma, m));
            return std::isfinite(v) ? v : 1e300;
        };
        SimplexOptions opts;
        opts.max_iters = nm_iters;
        auto [u_best, best] = nelder_mead(objective, std::vector<double>(dim, 0.0), opts);
        if (!std::isfinite(best)) throw std::runtime_error("sarima css objective diverged");
        CoeffSets c = unpack(u_best, orders);
        model.ar = c.ar;
        model.ma = c.ma;
        model.sar = c.sar;
        model.sma = c.sma;
        sse = css_sse(w, expand_ar(c.ar, c.sar, m), expand_ma(c.ma, c.sma, m), &eps);
    }

    model.sigma2 = std::max(sse / n_eff, 1e-300);
    model.aic = n_eff * std::log(std::max(sse / n_eff, 1e-30)) +
                2.0 * static_cast<double>(orders.param_count() + 1);

    // History tails for walk-forward prediction.
    const std::size_t raw_depth = static_cast<std::size_t>(orders.d) + m * orders.D;
    model.raw_tail.assign(train.end() - static_cast<std::ptrdiff_t>(raw_depth), train.end());
    const std::size_t ar_depth = static_cast<std::size_t>(orders.p) + m * orders.P;
    const std::size_t ma_depth = static_cast<std::size_t>(orders.q) + m * orders.Q;
    model.w_tail.assign(ar_depth, 0.0);
    model.eps_tail.assign(ma_depth, 0.0);
    for (std::size_t i = 0; i < ar_depth && i < w.size(); ++i)
        model.w_tail[ar_depth - 1 - i] = w[w.size() - 1 - i];
    for (std::size_t j = 0; j < ma_depth && j < eps.size(); ++j)
        model.eps_tail[ma_depth - 1 - j] = eps[eps.size() - 1 - j];
    return model;
}

}  // namespace

SarimaOrders::SarimaOrders(int p_, int d_, int q_, int P_, int D_, int Q_, std::size_t m)
    : p(p_), d(d_), q(q_), P(P_), D(D_), Q(Q_), period(m) {
    auto in = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
    if (!in(p, 0, 2) || !in(q, 0, 2) || !in(P, 0, 2) || !in(Q, 0, 2) || !in(d, 0, 1) ||
        !in(D, 0, 1))
        throw std::invalid_argument("sarima orders out of range");
    if (p + d + q + P + D + Q == 0)
        throw std::invalid_argument("all-zero sarima orders");
    if (period < 1) throw std::invalid_argument("sarima period must be >= 1");
}

std::vector<double> difference(const std::vector<double>& x, int d, int D, std::size_t m) {
    std::vector<double> out = x;
    for (int i = 0; i < d; ++i) {
        std::vector<double> next(out.size() - 1);
        for (std::size_t j = 1; j < out.size(); ++j) next[j - 1] = out[j] - out[j - 1];
        out = std::move(next);
    }
    for (int i = 0; i < D; ++i) {
        if (out.size() <= m) throw std::invalid_argument("series too short to difference");
        std::vector<double> next(out.size() - m);
        for (std::size_t j = m; j < out.size(); ++j) next[j - m] = out[j] - out[j - m];
        out = std::move(next);
    }
    return out;
}

SarimaModel sarima_fit(const std::vector<double>& train, const SarimaOrders& orders) {
    return fit_impl(train, orders, 250 * static_cast<std::size_t>(
                                       std::max(1, orders.param_count())));
}

SarimaOrders sarima_select(const std::vector<double>& train, std::size_t period,
                           bool seasonal_terms) {
    const std::size_t m = std::max<std::size_t>(period, 1);
    if (train.size() < 3 * m + 20)
        throw std::invalid_argument("train too short for sarima order selection");

    bool found = false;
    SarimaOrders best;
    double best_aic = std::numeric_limits<double>::infinity();
    const int seasonal_hi = seasonal_terms ? 2 : 0;
    const int sd_hi = seasonal_terms ? 1 : 0;

    for (int p = 0; p <= 2; ++p)
        for (int d = 0; d <= 1; ++d)
            for (int q = 0; q <= 2; ++q)
                for (int P = 0; P <= seasonal_hi; ++P)
                    for (int D = 0; D <= sd_hi; ++D)
                        for (int Q = 0; Q <= seasonal_hi; ++Q) {
                            if (p + d + q + P + D + Q == 0) continue;
                            SarimaOrders cand(p, d, q, P, D, Q, m);
                            double aic;
                            try {
                                aic = fit_impl(train, cand, 120).aic;
                            } catch (const std::exception&) {
                                continue;  // fit failure skips the candidate
                            }
                            if (!std::isfinite(aic)) continue;
                            const bool better =
                                !found || aic < best_aic - 1e-9 ||
                                (aic < best_aic + 1e-9 &&
                                 std::tuple(cand.param_count(), p, d, q, P, D, Q) <
                                     std::tuple(best.param_count(), best.p, best.d, best.q,
                                                best.P, best.D, best.Q));
                            if (better) {
                                best = cand;
                                best_aic = aic;
                                found = true;
                            }
                        }
    if (!found) throw std::runtime_error("every sarima candidate failed to fit");
    return best;
}

std::vector<double> sarima_predict_one_step(SarimaModel& model,
                                            const std::vector<double>& observed) {
    const SarimaOrders& o = model.orders;
    const std::size_t m = o.period;
    const std::vector<double> ar_full = expand_ar(model.ar, model.sar, m);
    const std::vector<double> ma_full = expand_ma(model.ma, model.sma, m);

    std::vector<double> forecasts;
    forecasts.reserve(observed.size());
    for (double x : observed) {
        double w_hat = 0.0;
        for (std::size_t i = 0; i < ar_full.size(); ++i)
            w_hat += ar_full[i] * model.w_tail[model.w_tail.size() - 1 - i];
        for (std::size_t j = 0; j < ma_full.size(); ++j)
            w_hat += ma_full[j] * model.eps_tail[model.eps_tail.size() - 1 - j];
        const double v_hat = w_hat + model.intercept;
        const double x_hat = v_hat + inversion_term(model.raw_tail, o.d, o.D, m);
        forecasts.push_back(x_hat);

        // Absorb the true observation.
        const double v_true = x - inversion_term(model.raw_tail, o.d, o.D, m);
        push_tail(model.w_tail, v_true - model.intercept);
        push_tail(model.eps_tail, v_true - v_hat);
        push_tail(model.raw_tail, x);
        if (model.raw_tail.empty() && (o.d > 0 || o.D > 0)) model.raw_tail.push_back(x);
    }
    return forecasts;
}

std::vector<double> sarima_in_sample_forecasts(const SarimaModel& model,
                                               const std::vector<double>& train) {
    const SarimaOrders& o = model.orders;
    const std::size_t m = o.period;
    const std::size_t offset = static_cast<std::size_t>(o.d) + m * o.D;
    std::vector<double> w = difference(train, o.d, o.D, m);
    for (double& v : w) v -= model.intercept;

    const std::vector<double> ar_full = expand_ar(model.ar, model.sar, m);
    const std::vector<double> ma_full = expand_ma(model.ma, model.sma, m);

    std::vector<double> forecasts(train.size());
    std::vector<double> eps(w.size(), 0.0);
    for (std::size_t j = 0; j < offset && j < train.size(); ++j) forecasts[j] = train[j];
    for (std::size_t t = 0; t < w.size(); ++t) {
        double w_hat = 0.0;
        for (std::size_t i = 0; i < ar_full.size() && i < t; ++i)
            w_hat += ar_full[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < ma_full.size() && j < t; ++j)
            w_hat += ma_full[j] * eps[t - 1 - j];
        eps[t] = w[t] - w_hat;

        const std::size_t pos = t + offset;  // index into train
        double inv = 0.0;
        if (o.d == 1 && o.D == 0) inv = train[pos - 1];
        else if (o.d == 0 && o.D == 1) inv = train[pos - m];
        else if (o.d == 1 && o.D == 1) inv = train[pos - 1] + train[pos - m] - train[pos - m - 1];
        forecasts[pos] = w_hat + model.intercept + inv;
    }
    return forecasts;
}

}  // namespace tsad
