#pragma once

#include "qgil/dataset.hpp"
#include "qgil/nn.hpp"

namespace qgil {

// Agent policy: observation -> proposed action.
struct Policy {
    nn::Mlp net;

    // Hidden stack [128, 128, 32, 8], dropout 0.2, linear action head.
    static Policy make(int obs_dim, int action_dim, double dropout = 0.2);

    bool operator==(const Policy&) const = default;
};

enum class LossVariant { Regression, Classifier };

// Auxiliary net over the concatenated [state; proposed action]. The
// Regression variant predicts the expert-minus-proposed action difference
// vector; the Classifier variant predicts the probability that the norm of
// that difference exceeds tau.
struct LossNet {
    nn::Mlp net;
    LossVariant variant = LossVariant::Regression;
    double tau = 0.0;  // safety threshold on the action-difference norm

    // Hidden stack [128, 128, 64, 64, 32, 32, 16, 16, 8], dropout 0.2.
    static LossNet make(int obs_dim, int action_dim, LossVariant variant, double tau,
                        double dropout = 0.2);

    bool operator==(const LossNet&) const = default;
};

// Deterministic eval-mode action proposal; clamping to the environment's
// action bounds happens at execution time, not here.
Vec propose_action(const Policy& policy, const Vec& observation);

// The scalar risk signal l-hat compared against the query rules. Regression:
// L2 norm of the predicted difference vector (>= 0). Classifier: predicted
// probability, in (0,1).
double loss_estimate(const LossNet& lossnet, const Vec& observation, const Vec& action);

// L2 norm of d(l-hat)/d[observation; action]. The Regression variant
// differentiates the output-norm scalarization; at the zero-output kink the
// gradient is defined as zero.
double risk_gradient_norm(const LossNet& lossnet, const Vec& observation, const Vec& action);

struct LossnetFitReport {
    double best_val_loss = 0.0;
    bool single_class_labels = false;  // classifier targets were all 0 or all 1
    int epochs_run = 0;
};

// Trains the loss network from scratch targets derived from the dataset:
// difference vectors (Regression, MSE) or exceedance indicators (Classifier,
// log-loss). `indices` selects the train/val partition over the dataset.
LossnetFitReport fit_lossnet(LossNet& lossnet, const Dataset& dataset, const SplitIndices& indices,
                             const nn::TrainConfig& cfg);

struct PolicyFitReport {
    double best_val_loss = 0.0;
    int epochs_run = 0;
};

// Trains the policy on (state -> expert action) with MSE.
PolicyFitReport fit_policy(Policy& policy, const Dataset& dataset, const SplitIndices& indices,
                           const nn::TrainConfig& cfg);

}  // namespace qgil
