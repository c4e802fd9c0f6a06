#include "tsad/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsad {

std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& x0, const SimplexOptions& opts) {
    const std::size_t dim = x0.size();
    if (dim == 0) throw std::invalid_argument("nelder_mead needs dimension >= 1");

    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;

    std::vector<std::vector<double>> simplex(dim + 1, x0);
    for (std::size_t i = 0; i < dim; ++i) {
        double step = (x0[i] != 0.0) ? 0.05 * std::abs(x0[i]) : 0.1;
        simplex[i + 1][i] += step;
    }
    std::vector<double> fvals(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fvals[i] = objective(simplex[i]);
    if (!std::isfinite(fvals[0]))
        throw std::invalid_argument("objective non-finite at the starting point");

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

    for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

        // Convergence: simplex diameter or value spread collapsed.
        double diam = 0.0;
        for (std::size_t i = 1; i <= dim; ++i)
            for (std::size_t k = 0; k < dim; ++k)
                diam = std::max(diam, std::abs(simplex[order[i]][k] - simplex[best][k]));
        // Both must collapse: vertices straddling a minimum can share a value
        // while the simplex is still wide.
        if (diam < opts.x_tol && std::abs(fvals[worst] - fvals[best]) < opts.f_tol) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k];
        }
        for (std::size_t k = 0; k < dim; ++k) centroid[k] /= static_cast<double>(dim);

        for (std::size_t k = 0; k < dim; ++k)
            xr[k] = centroid[k] + kReflect * (centroid[k] - simplex[worst][k]);
        double fr = objective(xr);

        if (fr < fvals[best]) {
            for (std::size_t k = 0; k < dim; ++k)
                xe[k] = centroid[k] + kExpand * (xr[k] - centroid[k]);
            double fe = objective(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fvals[worst] = fe;
            } else {
                simplex[worst] = xr;
                fvals[worst] = fr;
            }
        } else if (fr < fvals[second]) {
            simplex[worst] = xr;
            fvals[worst] = fr;
        } else {
            const bool outside = fr < fvals[worst];
            if (outside) {
                for (std::size_t k = 0; k < dim; ++k)
                    xc[k] = centroid[k] + kContract * (xr[k] - centroid[k]);
            } else {
                for (std::size_t k = 0; k < dim; ++k)
                    xc[k] = centroid[k] - kContract * (centroid[k] - simplex[worst][k]);
            }
            double fc = objective(xc);
            if (fc < std::min(fr, fvals[worst])) {
                simplex[worst] = xc;
                fvals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < dim; ++k)
                        simplex[i][k] =
                            simplex[best][k] + kShrink * (simplex[i][k] - simplex[best][k]);
                    fvals[i] = objective(simplex[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i)
        if (fvals[i] < fvals[best]) best = i;
    return {simplex[best], fvals[best]};
}

std::vector<double> clip_gradients(const std::vector<double>& grads, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("max_norm must be positive");
    double ss = 0.0;
    for (double g : grads) ss += g * g;
    const double norm = std::sqrt(ss);
    if (norm <= max_norm) return grads;
    std::vector<double> out(grads);
    const double scale = max_norm / norm;
    for (double& g : out) g *= scale;
    return out;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
    const std::size_t dim = params.size();
    if (grads.size() != dim || state.first_moment.size() != dim)
        throw std::invalid_argument("adam_step dimension mismatch");

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < dim; ++i) {
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * grads[i];
        state.second_moment[i] =
            state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

StopDecision EarlyStopper::update(double val_loss, const std::vector<double>& params) {
    if (val_loss < best_loss_ - 1e-12) {
        best_loss_ = val_loss;
        epochs_since_best_ = 0;
        best_snapshot_ = params;
        return StopDecision::kContinue;
    }
    ++epochs_since_best_;
    return (epochs_since_best_ > patience_) ? StopDecision::kStop : StopDecision::kContinue;
}

}  // namespace tsad
