#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qgil/common.hpp"
#include "qgil/rng.hpp"

namespace qgil::nn {

enum class OutputActivation { Identity, Logistic };
enum class Mode { Train, Eval };
enum class Objective { Regression, Binary };

// Scalarization applied on top of the network output when differentiating
// with respect to the input. Identity requires a 1-d output (the scalar is
// the single output value, after the output activation); L2Norm is the
// Euclidean norm of the output vector.
enum class ScalarHead { Identity, L2Norm };

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    int max_epochs = 200;
    int patience = 20;  // epochs without validation improvement before stopping
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

// Plain feed-forward network. Hidden activation is tanh; dropout (inverted,
// hidden layers only) is active only in train-mode forward passes. Weights
// are row-major (out x in) per layer.
struct Mlp {
    std::vector<int> layer_sizes;       // input, hidden..., output
    std::vector<Vec> weights;           // weights[k]: layer_sizes[k+1] x layer_sizes[k]
    std::vector<Vec> biases;            // biases[k]: layer_sizes[k+1]
    double dropout_rate = 0.0;          // in [0, 1)
    OutputActivation output_activation = OutputActivation::Identity;

    static Mlp make(std::vector<int> sizes, OutputActivation out_act, double dropout = 0.0);

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    // Glorot-uniform weights, zero biases.
    void init_weights(RngStream& rng);

    bool operator==(const Mlp&) const = default;
};

// Activation record from one forward pass; sufficient for both backward
// passes. `hidden_raw` holds tanh values before dropout so derivatives do
// not depend on the mask encoding.
struct ForwardCache {
    std::vector<Vec> inputs;      // inputs[k]: vector fed into layer k (post-dropout)
    std::vector<Vec> hidden_raw;  // hidden_raw[k]: tanh output of hidden layer k, pre-dropout
    std::vector<Vec> masks;       // masks[k]: inverted-dropout scale per unit (empty in eval)
    Vec output;                   // final output, after output activation
};

// Forward pass. rng is required iff mode == Train and dropout_rate > 0.
Vec forward(const Mlp& net, const Vec& input, Mode mode, RngStream* rng = nullptr,
            ForwardCache* cache = nullptr);

inline Vec forward_eval(const Mlp& net, const Vec& input) {
    return forward(net, input, Mode::Eval);
}

struct ParamGrads {
    std::vector<Vec> weights;  // same shapes as Mlp::weights
    std::vector<Vec> biases;

    static ParamGrads zeros_like(const Mlp& net);
    void scale(double s);
};

// Gradients of a scalar loss with respect to all parameters, given the
// gradient of that loss with respect to the network output.
ParamGrads backward_params(const Mlp& net, const ForwardCache& cache, const Vec& output_grad);

struct InputGradient {
    Vec grad;                    // same length as the input
    bool zero_norm_kink = false; // L2Norm head hit the zero-output point
};

// Gradient of (head o net)(input) with respect to the input. Evaluation
// mode only (dropout disabled). At the L2Norm head's zero-output point the
// gradient is defined as zero and flagged.
InputGradient input_gradient(const Mlp& net, const Vec& input, ScalarHead head);

struct SampleSet {
    std::vector<Vec> inputs;
    std::vector<Vec> targets;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
    void add(Vec in, Vec target) {
        inputs.push_back(std::move(in));
        targets.push_back(std::move(target));
    }
};

struct TrainResult {
    Mlp net;                             // snapshot with the lowest validation loss
    std::vector<double> val_loss_history;  // one entry per completed epoch
    double best_val_loss;                // +inf when val set is empty
    int best_epoch;                      // 0-based; -1 when val set is empty
    int epochs_run;
};

// Mean per-sample loss in eval mode. Regression: mean over output dims of
// squared error. Binary: log-loss (output dim must be 1).
double evaluate_loss(const Mlp& net, const SampleSet& data, Objective objective);

// SGD with momentum 0.9 and validation-based early stopping. Returns the
// parameter snapshot with the lowest validation loss; with an empty val set
// the last-epoch parameters are returned. Throws DivergenceError when a
// non-finite loss shows up.
TrainResult train(const Mlp& net, const SampleSet& train_set, const SampleSet& val_set,
                  Objective objective, const TrainConfig& cfg);

}  // namespace qgil::nn
