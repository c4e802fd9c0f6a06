#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tsad {

struct LstmHyperparams {
    std::size_t window = 50;
    std::size_t layers = 2;
    std::size_t hidden = 64;
    double dropout = 0.2;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double clip_norm = 1.0;
    std::size_t max_epochs = 30;
    std::size_t patience = 5;
    std::uint64_t seed = 0;
};

// All parameters live in one flat vector; the shape maps names to slices.
// Per layer, gate order is (f, i, o, c): W_* (hidden x hidden, recurrent),
// U_* (hidden x input_dim), b_* (hidden). The output head is a hidden-length
// weight vector plus a scalar bias.
struct LstmShape {
    std::size_t layers = 2;
    std::size_t hidden = 64;

    std::size_t layer_input(std::size_t layer) const { return layer == 0 ? 1 : hidden; }
    std::size_t layer_params(std::size_t layer) const {
        return 4 * (hidden * hidden + hidden * layer_input(layer) + hidden);
    }
    std::size_t layer_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t l = 0; l < layer; ++l) off += layer_params(l);
        return off;
    }
    std::size_t head_offset() const { return layer_offset(layers); }
    std::size_t total() const { return head_offset() + hidden + 1; }
};

struct LstmParams {
    LstmShape shape;
    std::vector<double> values;  // length shape.total()
};

LstmParams lstm_init(const LstmShape& shape, std::uint64_t seed);

struct WindowedDataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
};

WindowedDataset make_windows(const std::vector<double>& values, std::size_t w);

// Intermediate activations retained for backpropagation through time.
struct LstmCache {
    std::size_t steps = 0;
    // Indexed [layer][t*hidden + u].
    std::vector<std::vector<double>> gate_f, gate_i, gate_o, gate_c;
    std::vector<std::vector<double>> cell, cell_tanh, hid;
    std::vector<std::vector<double>> layer_in;  // input fed to each layer per step
    std::vector<double> top_hidden;             // final hidden state of the top layer
    double prediction = 0.0;
};

// Per-layer dropout masks applied to a layer's hidden output before it
// feeds the next layer; inverted scaling (0 or 1/(1-rate)). Empty = off.
using DropoutMasks = std::vector<std::vector<double>>;

DropoutMasks make_dropout_masks(const LstmShape& shape, std::size_t steps, double rate,
                                std::uint64_t seed);

double lstm_forward(const LstmParams& params, const std::vector<double>& window,
                    LstmCache& cache, const DropoutMasks* masks = nullptr);

// Gradient of (prediction - target)^2 for one window; accumulates into grad.
void lstm_backward(const LstmParams& params, const std::vector<double>& window,
                   const LstmCache& cache, double target, std::vector<double>& grad,
                   const DropoutMasks* masks = nullptr);

struct EpochLog {
    std::size_t epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct LstmFitResult {
    LstmParams params;
    std::vector<EpochLog> log;
    std::size_t stopped_epoch = 0;
    double best_val_mse = 0.0;
};

// Mini-batch Adam training with gradient clipping and early stopping on
// validation MSE. Validation windows draw warm-up history from the train tail.
LstmFitResult lstm_fit(const std::vector<double>& train, const std::vector<double>& val,
                       const LstmHyperparams& hp);

// One forecast per position >= w in `observed` (dropout off).
std::vector<double> lstm_predict_one_step(const LstmParams& params,
                                          const std::vector<double>& observed, std::size_t w);

}  // namespace tsad
