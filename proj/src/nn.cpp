#include "qgil/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qgil::nn {

namespace {

constexpr double kMomentum = 0.9;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// s += W x + b for one layer, W row-major (out x in).
void affine(const Vec& w, const Vec& b, const double* x, int in, int out, double* z) {
    for (int i = 0; i < out; ++i) {
        const double* row = w.data() + static_cast<std::size_t>(i) * in;
        double s = b[i];
#pragma omp simd reduction(+ : s)
        for (int j = 0; j < in; ++j) s += row[j] * x[j];
        z[i] = s;
    }
}

void apply_output_activation(OutputActivation act, Vec& z) {
    if (act == OutputActivation::Logistic) {
        for (double& v : z) v = logistic(v);
    }
}

}  // namespace

Mlp Mlp::make(std::vector<int> sizes, OutputActivation out_act, double dropout) {
    if (sizes.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
    for (int s : sizes) {
        if (s <= 0) throw ConfigError("Mlp: layer sizes must be positive");
    }
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("Mlp: dropout_rate must be in [0,1)");
    Mlp net;
    net.layer_sizes = std::move(sizes);
    net.dropout_rate = dropout;
    net.output_activation = out_act;
    const int layers = static_cast<int>(net.layer_sizes.size()) - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (int k = 0; k < layers; ++k) {
        net.weights[k].assign(
            static_cast<std::size_t>(net.layer_sizes[k + 1]) * net.layer_sizes[k], 0.0);
        net.biases[k].assign(net.layer_sizes[k + 1], 0.0);
    }
    return net;
}

void Mlp::init_weights(RngStream& rng) {
    for (int k = 0; k < num_layers(); ++k) {
        const int fan_in = layer_sizes[k];
        const int fan_out = layer_sizes[k + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : weights[k]) w = rng.uniform(-limit, limit);
        std::fill(biases[k].begin(), biases[k].end(), 0.0);
    }
}

Vec forward(const Mlp& net, const Vec& input, Mode mode, RngStream* rng, ForwardCache* cache) {
    if (static_cast<int>(input.size()) != net.input_dim()) {
        throw ShapeError("forward: input length " + std::to_string(input.size()) +
                         " does not match layer 0 width " + std::to_string(net.input_dim()));
    }
    const bool dropout_active = mode == Mode::Train && net.dropout_rate > 0.0;
    if (dropout_active && rng == nullptr) {
        throw ConfigError("forward: train mode with dropout requires an rng stream");
    }
    const int layers = net.num_layers();
    if (cache != nullptr) {
        cache->inputs.assign(layers, {});
        cache->hidden_raw.assign(layers > 0 ? layers - 1 : 0, {});
        cache->masks.clear();
        if (dropout_active) cache->masks.assign(layers - 1, {});
    }

    Vec activation = input;
    for (int k = 0; k < layers; ++k) {
        if (static_cast<int>(activation.size()) != net.layer_sizes[k]) {
            throw ShapeError("forward: layer " + std::to_string(k) + " expected input width " +
                             std::to_string(net.layer_sizes[k]));
        }
        if (cache != nullptr) cache->inputs[k] = activation;
        const int in = net.layer_sizes[k];
        const int out = net.layer_sizes[k + 1];
        Vec z(out);
        affine(net.weights[k], net.biases[k], activation.data(), in, out, z.data());
        if (k + 1 < layers) {
            for (double& v : z) v = std::tanh(v);
            if (cache != nullptr) cache->hidden_raw[k] = z;
            if (dropout_active) {
                const double keep = 1.0 - net.dropout_rate;
                Vec mask(out);
                for (int i = 0; i < out; ++i) {
                    mask[i] = rng->uniform() < net.dropout_rate ? 0.0 : 1.0 / keep;
                    z[i] *= mask[i];
                }
                if (cache != nullptr) cache->masks[k] = std::move(mask);
            }
        } else {
            apply_output_activation(net.output_activation, z);
        }
        activation = std::move(z);
    }
    if (cache != nullptr) cache->output = activation;
    return activation;
}

ParamGrads ParamGrads::zeros_like(const Mlp& net) {
    ParamGrads g;
    g.weights.resize(net.num_layers());
    g.biases.resize(net.num_layers());
    for (int k = 0; k < net.num_layers(); ++k) {
        g.weights[k].assign(net.weights[k].size(), 0.0);
        g.biases[k].assign(net.biases[k].size(), 0.0);
    }
    return g;
}

void ParamGrads::scale(double s) {
    for (Vec& v : weights)
        for (double& x : v) x *= s;
    for (Vec& v : biases)
        for (double& x : v) x *= s;
}

namespace {

// Shared reverse pass. `delta` enters as the gradient at the output layer's
// pre-activation. Accumulates parameter gradients when accum != nullptr and
// writes the input gradient when input_grad != nullptr.
void backprop(const Mlp& net, const ForwardCache& cache, Vec delta, ParamGrads* accum,
              Vec* input_grad) {
    const int layers = net.num_layers();
    for (int k = layers - 1; k >= 0; --k) {
        const int in = net.layer_sizes[k];
        const int out = net.layer_sizes[k + 1];
        const Vec& x = cache.inputs[k];
        if (static_cast<int>(x.size()) != in || static_cast<int>(delta.size()) != out) {
            throw ShapeError("backward: cache does not match network at layer " +
                             std::to_string(k));
        }
        if (accum != nullptr) {
            Vec& gw = accum->weights[k];
            Vec& gb = accum->biases[k];
            for (int i = 0; i < out; ++i) {
                const double d = delta[i];
                double* grow = gw.data() + static_cast<std::size_t>(i) * in;
#pragma omp simd
                for (int j = 0; j < in; ++j) grow[j] += d * x[j];
                gb[i] += d;
            }
        }
        if (k == 0 && input_grad == nullptr) break;

        Vec prev(in, 0.0);
        for (int i = 0; i < out; ++i) {
            const double d = delta[i];
            const double* row = net.weights[k].data() + static_cast<std::size_t>(i) * in;
#pragma omp simd
            for (int j = 0; j < in; ++j) prev[j] += d * row[j];
        }
        if (k > 0) {
            // Through dropout (if recorded) and tanh of the previous hidden layer.
            const Vec& t = cache.hidden_raw[k - 1];
            if (!cache.masks.empty()) {
                const Vec& m = cache.masks[k - 1];
                for (int j = 0; j < in; ++j) prev[j] *= m[j] * (1.0 - t[j] * t[j]);
            } else {
                for (int j = 0; j < in; ++j) prev[j] *= 1.0 - t[j] * t[j];
            }
        } else {
            *input_grad = std::move(prev);
            return;
        }
        delta = std::move(prev);
    }
}

// Converts a gradient at the output (post-activation) into one at the output
// pre-activation.
Vec output_grad_to_preact(const Mlp& net, const ForwardCache& cache, const Vec& output_grad) {
    Vec delta = output_grad;
    if (net.output_activation == OutputActivation::Logistic) {
        for (std::size_t i = 0; i < delta.size(); ++i) {
            const double y = cache.output[i];
            delta[i] *= y * (1.0 - y);
        }
    }
    return delta;
}

}  // namespace

ParamGrads backward_params(const Mlp& net, const ForwardCache& cache, const Vec& output_grad) {
    if (static_cast<int>(output_grad.size()) != net.output_dim()) {
        throw ShapeError("backward_params: output_grad length " +
                         std::to_string(output_grad.size()) + " does not match output dim " +
                         std::to_string(net.output_dim()));
    }
    if (static_cast<int>(cache.inputs.size()) != net.num_layers()) {
        throw ShapeError("backward_params: cache does not match network depth");
    }
    ParamGrads grads = ParamGrads::zeros_like(net);
    backprop(net, cache, output_grad_to_preact(net, cache, output_grad), &grads, nullptr);
    return grads;
}

InputGradient input_gradient(const Mlp& net, const Vec& input, ScalarHead head) {
    ForwardCache cache;
    const Vec out = forward(net, input, Mode::Eval, nullptr, &cache);

    InputGradient result;
    Vec dscalar_dout(out.size(), 0.0);
    switch (head) {
        case ScalarHead::Identity:
            if (net.output_dim() != 1) {
                throw ShapeError("input_gradient: Identity head needs a 1-d output");
            }
            dscalar_dout[0] = 1.0;
            break;
        case ScalarHead::L2Norm: {
            const double norm = l2_norm(out);
            if (norm == 0.0) {
                result.grad.assign(input.size(), 0.0);
                result.zero_norm_kink = true;
                return result;
            }
            for (std::size_t i = 0; i < out.size(); ++i) dscalar_dout[i] = out[i] / norm;
            break;
        }
    }
    backprop(net, cache, output_grad_to_preact(net, cache, dscalar_dout), nullptr, &result.grad);
    return result;
}

namespace {

double sample_loss(const Vec& out, const Vec& target, Objective objective) {
    if (objective == Objective::Regression) {
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double e = out[i] - target[i];
            s += e * e;
        }
        return s / static_cast<double>(out.size());
    }
    // Binary log-loss; output clamped away from {0,1} for the loss value only.
    const double y = clamp(out[0], 1e-12, 1.0 - 1e-12);
    const double t = target[0];
    return -(t * std::log(y) + (1.0 - t) * std::log1p(-y));
}

void check_sample_set(const Mlp& net, const SampleSet& s, Objective objective, const char* what) {
    if (s.inputs.size() != s.targets.size()) {
        throw ShapeError(std::string(what) + ": inputs/targets size mismatch");
    }
    const std::size_t target_dim = objective == Objective::Binary
                                       ? 1
                                       : static_cast<std::size_t>(net.output_dim());
    for (std::size_t i = 0; i < s.size(); ++i) {
        require_size(s.inputs[i], static_cast<std::size_t>(net.input_dim()),
                     (std::string(what) + " input").c_str());
        require_size(s.targets[i], target_dim, (std::string(what) + " target").c_str());
    }
}

}  // namespace

double evaluate_loss(const Mlp& net, const SampleSet& data, Objective objective) {
    if (data.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        total += sample_loss(forward_eval(net, data.inputs[i]), data.targets[i], objective);
    }
    return total / static_cast<double>(data.size());
}

TrainResult train(const Mlp& init, const SampleSet& train_set, const SampleSet& val_set,
                  Objective objective, const TrainConfig& cfg) {
    if (train_set.empty()) throw ConfigError("train: empty training set");
    if (cfg.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
    if (cfg.batch_size <= 0) throw ConfigError("train: batch_size must be positive");
    if (cfg.max_epochs <= 0) throw ConfigError("train: max_epochs must be positive");
    if (cfg.patience < 0 || cfg.patience >= cfg.max_epochs) {
        throw ConfigError("train: need 0 <= patience < max_epochs");
    }
    if (objective == Objective::Binary && init.output_dim() != 1) {
        throw ConfigError("train: binary objective needs a 1-d output");
    }
    check_sample_set(init, train_set, objective, "train_set");
    check_sample_set(init, val_set, objective, "val_set");

    Mlp net = init;
    ParamGrads velocity = ParamGrads::zeros_like(net);
    ParamGrads grads = ParamGrads::zeros_like(net);
    RngStream rng(mix_seed(cfg.seed, 0x7261696eULL));

    const std::size_t n = train_set.size();
    const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    result.best_epoch = -1;
    result.epochs_run = 0;
    Mlp best = net;
    int epochs_since_improvement = 0;

    ForwardCache cache;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            for (Vec& g : grads.weights) std::fill(g.begin(), g.end(), 0.0);
            for (Vec& g : grads.biases) std::fill(g.begin(), g.end(), 0.0);

            for (std::size_t s = start; s < end; ++s) {
                const Vec& x = train_set.inputs[order[s]];
                const Vec& t = train_set.targets[order[s]];
                const Vec out = forward(net, x, Mode::Train, &rng, &cache);
                epoch_loss += sample_loss(out, t, objective);

                Vec delta(out.size());
                if (objective == Objective::Regression) {
                    const double scale = 2.0 / static_cast<double>(out.size());
                    for (std::size_t i = 0; i < out.size(); ++i) {
                        delta[i] = scale * (out[i] - t[i]);
                    }
                    delta = output_grad_to_preact(net, cache, delta);
                } else {
                    // d(log-loss)/d(preact) for the logistic head.
                    delta[0] = out[0] - t[0];
                }
                backprop(net, cache, std::move(delta), &grads, nullptr);
            }

            const double inv = 1.0 / static_cast<double>(end - start);
            for (int k = 0; k < net.num_layers(); ++k) {
                Vec& vw = velocity.weights[k];
                Vec& vb = velocity.biases[k];
                const Vec& gw = grads.weights[k];
                const Vec& gb = grads.biases[k];
                Vec& w = net.weights[k];
                Vec& b = net.biases[k];
                for (std::size_t i = 0; i < w.size(); ++i) {
                    vw[i] = kMomentum * vw[i] - cfg.learning_rate * gw[i] * inv;
                    w[i] += vw[i];
                }
                for (std::size_t i = 0; i < b.size(); ++i) {
                    vb[i] = kMomentum * vb[i] - cfg.learning_rate * gb[i] * inv;
                    b[i] += vb[i];
                }
            }
        }
        result.epochs_run = epoch + 1;
        if (!std::isfinite(epoch_loss)) {
            throw DivergenceError("train: non-finite training loss at epoch " +
                                  std::to_string(epoch));
        }

        if (!val_set.empty()) {
            const double val_loss = evaluate_loss(net, val_set, objective);
            if (!std::isfinite(val_loss)) {
                throw DivergenceError("train: non-finite validation loss at epoch " +
                                      std::to_string(epoch));
            }
            result.val_loss_history.push_back(val_loss);
            if (val_loss < result.best_val_loss) {
                result.best_val_loss = val_loss;
                result.best_epoch = epoch;
                best = net;
                epochs_since_improvement = 0;
            } else {
                ++epochs_since_improvement;
                if (epochs_since_improvement > cfg.patience) break;
            }
        }
    }

    result.net = val_set.empty() ? std::move(net) : std::move(best);
    return result;
}

}  // namespace qgil::nn
