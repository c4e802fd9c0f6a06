#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace tsad {

struct SimplexOptions {
    std::size_t max_iters = 500;
    double x_tol = 1e-6;
    double f_tol = 1e-9;
};

// Derivative-free simplex minimization; returns the best vertex and its value.
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& x0, const SimplexOptions& opts = {});

// Scales the gradient down to max_norm when its L2 norm exceeds it.
std::vector<double> clip_gradients(const std::vector<double>& grads, double max_norm);

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t dim, double lr = 1e-3)
        : first_moment(dim, 0.0), second_moment(dim, 0.0), learning_rate(lr) {}
};

// Standard Adam update with bias correction; mutates state and params in place.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

enum class StopDecision { kContinue, kStop };

class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience = 5) : patience_(patience) {}

    // Strict improvement beyond 1e-12 resets the counter and snapshots params.
    StopDecision update(double val_loss, const std::vector<double>& params);

    double best_loss() const { return best_loss_; }
    std::size_t epochs_since_best() const { return epochs_since_best_; }
    const std::vector<double>& best_snapshot() const { return best_snapshot_; }

private:
    std::size_t patience_;
    double best_loss_ = 1e300;
    std::size_t epochs_since_best_ = 0;
    std::vector<double> best_snapshot_;
};

}  // namespace tsad
