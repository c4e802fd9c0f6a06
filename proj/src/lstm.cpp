#include "tsad/lstm.hpp"

#include "tsad/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tsad {

namespace {

constexpr std::size_t kGateF = 0, kGateI = 1, kGateO = 2, kGateC = 3;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Offsets of a layer's slices inside the flat parameter vector.
struct LayerView {
    const double* W[4];  // hidden x hidden, recurrent
    const double* U[4];  // hidden x input_dim
    const double* b[4];
    std::size_t hidden;
    std::size_t input;
};

LayerView layer_view(const LstmParams& p, std::size_t layer) {
    const std::size_t h = p.shape.hidden;
    const std::size_t in = p.shape.layer_input(layer);
    const double* base = p.values.data() + p.shape.layer_offset(layer);
    LayerView v;
    v.hidden = h;
    v.input = in;
    for (std::size_t g = 0; g < 4; ++g) {
        v.W[g] = base + g * h * h;
        v.U[g] = base + 4 * h * h + g * h * in;
        v.b[g] = base + 4 * h * h + 4 * h * in + g * h;
    }
    return v;
}

struct LayerGradView {
    double* W[4];
    double* U[4];
    double* b[4];
};

LayerGradView layer_grad_view(const LstmShape& shape, std::vector<double>& grad,
                              std::size_t layer) {
    const std::size_t h = shape.hidden;
    const std::size_t in = shape.layer_input(layer);
    double* base = grad.data() + shape.layer_offset(layer);
    LayerGradView v;
    for (std::size_t g = 0; g < 4; ++g) {
        v.W[g] = base + g * h * h;
        v.U[g] = base + 4 * h * h + g * h * in;
        v.b[g] = base + 4 * h * h + 4 * h * in + g * h;
    }
    return v;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return a;
}

}  // namespace

LstmParams lstm_init(const LstmShape& shape, std::uint64_t seed) {
    LstmParams p;
    p.shape = shape;
    p.values.resize(shape.total());
    std::mt19937_64 rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
    std::uniform_real_distribution<double> dist(-k, k);
    for (double& v : p.values) v = dist(rng);

    // Zero biases, forget-gate bias offset +1 for early gradient flow.
    const std::size_t h = shape.hidden;
    for (std::size_t l = 0; l < shape.layers; ++l) {
        const std::size_t in = shape.layer_input(l);
        double* bias = p.values.data() + shape.layer_offset(l) + 4 * h * h + 4 * h * in;
        for (std::size_t i = 0; i < 4 * h; ++i) bias[i] = 0.0;
        for (std::size_t i = 0; i < h; ++i) bias[kGateF * h + i] = 1.0;
    }
    p.values[shape.total() - 1] = 0.0;  // head bias
    return p;
}

WindowedDataset make_windows(const std::vector<double>& values, std::size_t w) {
    if (values.size() <= w)
        throw std::invalid_argument("series too short for window size");
    WindowedDataset ds;
    const std::size_t count = values.size() - w;
    ds.inputs.reserve(count);
    ds.targets.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ds.inputs.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(k),
                               values.begin() + static_cast<std::ptrdiff_t>(k + w));
        ds.targets.push_back(values[k + w]);
    }
    return ds;
}

DropoutMasks make_dropout_masks(const LstmShape& shape, std::size_t steps, double rate,
                                std::uint64_t seed) {
    DropoutMasks masks;
    if (rate <= 0.0 || shape.layers < 2) return masks;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - rate);
    masks.resize(shape.layers - 1);
    for (auto& m : masks) {
        m.resize(steps * shape.hidden);
        for (double& v : m) v = (dist(rng) < rate) ? 0.0 : keep_scale;
    }
    return masks;
}

double lstm_forward(const LstmParams& params, const std::vector<double>& window,
                    LstmCache& cache, const DropoutMasks* masks) {
    const LstmShape& shape = params.shape;
    const std::size_t h = shape.hidden;
    const std::size_t L = shape.layers;
    const std::size_t T = window.size();
    for (double v : params.values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite lstm parameter");

    cache.steps = T;
    auto resize_all = [&](std::vector<std::vector<double>>& field) {
        field.resize(L);
        for (auto& v : field) v.assign(T * h, 0.0);
    };
    resize_all(cache.gate_f);
    resize_all(cache.gate_i);
    resize_all(cache.gate_o);
    resize_all(cache.gate_c);
    resize_all(cache.cell);
    resize_all(cache.cell_tanh);
    resize_all(cache.hid);
    cache.layer_in.resize(L);
    for (std::size_t l = 0; l < L; ++l)
        cache.layer_in[l].assign(T * shape.layer_input(l), 0.0);

    std::vector<double> z(4 * h);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < L; ++l) {
            const LayerView lv = layer_view(params, l);
            const std::size_t in_dim = lv.input;

            // Input: raw value for layer 0, (masked) lower hidden state above.
            double* in_t = cache.layer_in[l].data() + t * in_dim;
            if (l == 0) {
                in_t[0] = window[t];
            } else {
                const double* lower = cache.hid[l - 1].data() + t * h;
                if (masks && !masks->empty()) {
                    const double* m = (*masks)[l - 1].data() + t * h;
                    for (std::size_t u = 0; u < h; ++u) in_t[u] = lower[u] * m[u];
                } else {
                    for (std::size_t u = 0; u < h; ++u) in_t[u] = lower[u];
                }
            }

            const double* h_prev = (t > 0) ? cache.hid[l].data() + (t - 1) * h : nullptr;
            const double* c_prev = (t > 0) ? cache.cell[l].data() + (t - 1) * h : nullptr;

            for (std::size_t g = 0; g < 4; ++g) {
                double* zg = z.data() + g * h;
                const double* W = lv.W[g];
                const double* U = lv.U[g];
                for (std::size_t u = 0; u < h; ++u) {
                    double acc = lv.b[g][u];
                    if (h_prev) {
                        const double* row = W + u * h;
                        for (std::size_t v = 0; v < h; ++v) acc += row[v] * h_prev[v];
                    }
                    const double* urow = U + u * in_dim;
                    for (std::size_t j = 0; j < in_dim; ++j) acc += urow[j] * in_t[j];
                    zg[u] = acc;
                }
            }

            double* f = cache.gate_f[l].data() + t * h;
            double* i = cache.gate_i[l].data() + t * h;
            double* o = cache.gate_o[l].data() + t * h;
            double* cand = cache.gate_c[l].data() + t * h;
            double* c = cache.cell[l].data() + t * h;
            double* ct = cache.cell_tanh[l].data() + t * h;
            double* hh = cache.hid[l].data() + t * h;
            for (std::size_t u = 0; u < h; ++u) {
                f[u] = sigmoid(z[kGateF * h + u]);
                i[u] = sigmoid(z[kGateI * h + u]);
                o[u] = sigmoid(z[kGateO * h + u]);
                cand[u] = std::tanh(z[kGateC * h + u]);
                c[u] = i[u] * cand[u] + (c_prev ? f[u] * c_prev[u] : 0.0);
                ct[u] = std::tanh(c[u]);
                hh[u] = o[u] * ct[u];
            }
        }
    }

    const double* head_w = params.values.data() + shape.head_offset();
    const double head_b = params.values[shape.total() - 1];
    const double* h_top = cache.hid[L - 1].data() + (T - 1) * h;
    cache.top_hidden.assign(h_top, h_top + h);
    double pred = head_b;
    for (std::size_t u = 0; u < h; ++u) pred += head_w[u] * h_top[u];
    cache.prediction = pred;
    return pred;
}

void lstm_backward(const LstmParams& params, const std::vector<double>& window,
                   const LstmCache& cache, double target, std::vector<double>& grad,
                   const DropoutMasks* masks) {
    const LstmShape& shape = params.shape;
    const std::size_t h = shape.hidden;
    const std::size_t L = shape.layers;
    const std::size_t T = cache.steps;
    if (T != window.size()) throw std::invalid_argument("cache does not match window");
    if (grad.size() != shape.total()) grad.assign(shape.total(), 0.0);

    const double dpred = 2.0 * (cache.prediction - target);

    // Output head.
    const double* head_w = params.values.data() + shape.head_offset();
    double* head_grad = grad.data() + shape.head_offset();
    const double* h_top = cache.hid[L - 1].data() + (T - 1) * h;
    for (std::size_t u = 0; u < h; ++u) head_grad[u] += dpred * h_top[u];
    grad[shape.total() - 1] += dpred;

    // dext[l][t*h + u]: gradient reaching layer l's hidden output from above.
    std::vector<std::vector<double>> dext(L);
    for (auto& v : dext) v.assign(T * h, 0.0);
    for (std::size_t u = 0; u < h; ++u) dext[L - 1][(T - 1) * h + u] = dpred * head_w[u];

    std::vector<double> dh(h), dc(h), dh_rec(h), dc_next(h), dz(4 * h);

    for (std::size_t l = L; l-- > 0;) {
        const LayerView lv = layer_view(params, l);
        const LayerGradView gv = layer_grad_view(shape, grad, l);
        const std::size_t in_dim = lv.input;
        std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
        std::fill(dc_next.begin(), dc_next.end(), 0.0);

        for (std::size_t t = T; t-- > 0;) {
            const double* f = cache.gate_f[l].data() + t * h;
            const double* i = cache.gate_i[l].data() + t * h;
            const double* o = cache.gate_o[l].data() + t * h;
            const double* cand = cache.gate_c[l].data() + t * h;
            const double* ct = cache.cell_tanh[l].data() + t * h;
            const double* c_prev = (t > 0) ? cache.cell[l].data() + (t - 1) * h : nullptr;
            const double* h_prev = (t > 0) ? cache.hid[l].data() + (t - 1) * h : nullptr;
            const double* in_t = cache.layer_in[l].data() + t * in_dim;

            for (std::size_t u = 0; u < h; ++u) {
                dh[u] = dext[l][t * h + u] + dh_rec[u];
                const double d_o = dh[u] * ct[u];
                dc[u] = dh[u] * o[u] * (1.0 - ct[u] * ct[u]) + dc_next[u];
                const double d_f = c_prev ? dc[u] * c_prev[u] : 0.0;
                const double d_i = dc[u] * cand[u];
                const double d_cand = dc[u] * i[u];
                dz[kGateF * h + u] = d_f * f[u] * (1.0 - f[u]);
                dz[kGateI * h + u] = d_i * i[u] * (1.0 - i[u]);
                dz[kGateO * h + u] = d_o * o[u] * (1.0 - o[u]);
                dz[kGateC * h + u] = d_cand * (1.0 - cand[u] * cand[u]);
                dc_next[u] = dc[u] * f[u];
            }

            std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
            for (std::size_t g = 0; g < 4; ++g) {
                const double* zg = dz.data() + g * h;
                for (std::size_t u = 0; u < h; ++u) {
                    const double d = zg[u];
                    if (d == 0.0) continue;
                    gv.b[g][u] += d;
                    if (h_prev) {
                        double* wrow = gv.W[g] + u * h;
                        const double* W = lv.W[g] + u * h;
                        for (std::size_t v = 0; v < h; ++v) {
                            wrow[v] += d * h_prev[v];
                            dh_rec[v] += d * W[v];
                        }
                    }
                    double* urow = gv.U[g] + u * in_dim;
                    for (std::size_t j = 0; j < in_dim; ++j) urow[j] += d * in_t[j];
                }
            }

            // Gradient into the lower layer's hidden output, through the mask.
            if (l > 0) {
                double* lower = dext[l - 1].data() + t * h;
                const double* m =
                    (masks && !masks->empty()) ? (*masks)[l - 1].data() + t * h : nullptr;
                for (std::size_t g = 0; g < 4; ++g) {
                    const double* zg = dz.data() + g * h;
                    const double* U = lv.U[g];
                    for (std::size_t u = 0; u < h; ++u) {
                        const double d = zg[u];
                        if (d == 0.0) continue;
                        const double* urow = U + u * in_dim;
                        for (std::size_t j = 0; j < in_dim; ++j)
                            lower[j] += d * urow[j] * (m ? m[j] : 1.0);
                    }
                }
            }
        }
    }
}

LstmFitResult lstm_fit(const std::vector<double>& train, const std::vector<double>& val,
                       const LstmHyperparams& hp) {
    const std::size_t w = hp.window;
    if (train.size() <= w) throw std::invalid_argument("train too short for lstm window");
    if (val.empty()) throw std::invalid_argument("lstm_fit needs a validation segment");

    WindowedDataset train_ds = make_windows(train, w);

    // Warm-up history for validation from the train tail: every val point
    // becomes a target.
    std::vector<double> val_seq(train.end() - static_cast<std::ptrdiff_t>(w), train.end());
    val_seq.insert(val_seq.end(), val.begin(), val.end());
    WindowedDataset val_ds = make_windows(val_seq, w);

    LstmShape shape;
    shape.layers = hp.layers;
    shape.hidden = hp.hidden;
    LstmParams params = lstm_init(shape, hp.seed);

    AdamState adam(shape.total(), hp.learning_rate);
    EarlyStopper stopper(hp.patience);
    LstmFitResult result;

    const std::size_t n_windows = train_ds.inputs.size();
    std::vector<std::size_t> order(n_windows);
    std::iota(order.begin(), order.end(), 0);

    LstmCache cache;
    std::vector<double> grad(shape.total(), 0.0);
    std::vector<double> batch_grad(shape.total(), 0.0);

    auto eval_mse = [&](const WindowedDataset& ds) {
        double sse = 0.0;
        for (std::size_t k = 0; k < ds.inputs.size(); ++k) {
            const double e = lstm_forward(params, ds.inputs[k], cache) - ds.targets[k];
            sse += e * e;
        }
        return sse / static_cast<double>(ds.inputs.size());
    };

    for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(mix(hp.seed, epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double train_sse = 0.0;
        for (std::size_t start = 0; start < n_windows; start += hp.batch_size) {
            const std::size_t stop = std::min(start + hp.batch_size, n_windows);
            const double batch = static_cast<double>(stop - start);
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t k = order[b];
                DropoutMasks masks =
                    make_dropout_masks(shape, w, hp.dropout, mix(mix(hp.seed, epoch), k));
                const DropoutMasks* mp = masks.empty() ? nullptr : &masks;
                const double pred = lstm_forward(params, train_ds.inputs[k], cache, mp);
                const double e = pred - train_ds.targets[k];
                train_sse += e * e;
                std::fill(grad.begin(), grad.end(), 0.0);
                lstm_backward(params, train_ds.inputs[k], cache, train_ds.targets[k], grad, mp);
                for (std::size_t i = 0; i < grad.size(); ++i)
                    batch_grad[i] += grad[i] / batch;
            }
            batch_grad = clip_gradients(batch_grad, hp.clip_norm);
            adam_step(adam, params.values, batch_grad);
        }

        const double train_mse = train_sse / static_cast<double>(n_windows);
        if (!std::isfinite(train_mse))
            throw std::runtime_error("lstm training diverged (non-finite loss) at epoch " +
                                     std::to_string(epoch));
        const double val_mse = eval_mse(val_ds);
        result.log.push_back({epoch, train_mse, val_mse});
        result.stopped_epoch = epoch;
        if (stopper.update(val_mse, params.values) == StopDecision::kStop) break;
    }

    if (!stopper.best_snapshot().empty()) params.values = stopper.best_snapshot();
    result.best_val_mse = stopper.best_loss();
    result.params = std::move(params);
    return result;
}

std::vector<double> lstm_predict_one_step(const LstmParams& params,
                                          const std::vector<double>& observed, std::size_t w) {
    if (observed.size() < w + 1)
        throw std::invalid_argument("too little history for lstm prediction");
    std::vector<double> forecasts;
    forecasts.reserve(observed.size() - w);
    LstmCache cache;
    std::vector<double> window(w);
    for (std::size_t t = w; t < observed.size(); ++t) {
        std::copy(observed.begin() + static_cast<std::ptrdiff_t>(t - w),
                  observed.begin() + static_cast<std::ptrdiff_t>(t), window.begin());
        forecasts.push_back(lstm_forward(params, window, cache));
    }
    return forecasts;
}

}  // namespace tsad
