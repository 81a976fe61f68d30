#include "qgil/heads.hpp"

#include <cmath>

namespace qgil {

namespace {

Vec concat(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

nn::SampleSet gather(const Dataset& dataset, const std::vector<std::size_t>& idx,
                     const LossNet* lossnet, bool policy_targets) {
    nn::SampleSet s;
    for (std::size_t i : idx) {
        const DemoRecord& r = dataset.records[i];
        if (policy_targets) {
            s.add(r.state, r.expert_action);
            continue;
        }
        Vec input = concat(r.state, r.proposed_action);
        if (lossnet->variant == LossVariant::Regression) {
            Vec diff(r.expert_action.size());
            for (std::size_t k = 0; k < diff.size(); ++k) {
                diff[k] = r.expert_action[k] - r.proposed_action[k];
            }
            s.add(std::move(input), std::move(diff));
        } else {
            double sq = 0.0;
            for (std::size_t k = 0; k < r.expert_action.size(); ++k) {
                const double d = r.expert_action[k] - r.proposed_action[k];
                sq += d * d;
            }
            s.add(std::move(input), {std::sqrt(sq) > lossnet->tau ? 1.0 : 0.0});
        }
    }
    return s;
}

}  // namespace

Policy Policy::make(int obs_dim, int action_dim, double dropout) {
    if (obs_dim <= 0 || action_dim <= 0) throw ConfigError("Policy: dims must be positive");
    Policy p;
    p.net = nn::Mlp::make({obs_dim, 128, 128, 32, 8, action_dim},
                          nn::OutputActivation::Identity, dropout);
    return p;
}

LossNet LossNet::make(int obs_dim, int action_dim, LossVariant variant, double tau,
                      double dropout) {
    if (obs_dim <= 0 || action_dim <= 0) throw ConfigError("LossNet: dims must be positive");
    if (tau < 0.0) throw ConfigError("LossNet: tau must be non-negative");
    LossNet ln;
    ln.variant = variant;
    ln.tau = tau;
    const int out = variant == LossVariant::Regression ? action_dim : 1;
    const auto head = variant == LossVariant::Regression ? nn::OutputActivation::Identity
                                                         : nn::OutputActivation::Logistic;
    ln.net = nn::Mlp::make({obs_dim + action_dim, 128, 128, 64, 64, 32, 32, 16, 16, 8, out},
                           head, dropout);
    return ln;
}

Vec propose_action(const Policy& policy, const Vec& observation) {
    return nn::forward_eval(policy.net, observation);
}

double loss_estimate(const LossNet& lossnet, const Vec& observation, const Vec& action) {
    const Vec input = concat(observation, action);
    const Vec out = nn::forward_eval(lossnet.net, input);
    if (lossnet.variant == LossVariant::Regression) return l2_norm(out);
    return out[0];
}

double risk_gradient_norm(const LossNet& lossnet, const Vec& observation, const Vec& action) {
    const Vec input = concat(observation, action);
    const auto head = lossnet.variant == LossVariant::Regression ? nn::ScalarHead::L2Norm
                                                                 : nn::ScalarHead::Identity;
    const nn::InputGradient ig = nn::input_gradient(lossnet.net, input, head);
    if (ig.zero_norm_kink) return 0.0;
    return l2_norm(ig.grad);
}

LossnetFitReport fit_lossnet(LossNet& lossnet, const Dataset& dataset, const SplitIndices& indices,
                             const nn::TrainConfig& cfg) {
    if (indices.train.empty()) throw ConfigError("fit_lossnet: empty train split");
    const nn::SampleSet train_set = gather(dataset, indices.train, &lossnet, false);
    const nn::SampleSet val_set = gather(dataset, indices.val, &lossnet, false);

    LossnetFitReport report;
    if (lossnet.variant == LossVariant::Classifier) {
        bool any0 = false, any1 = false;
        for (const Vec& t : train_set.targets) (t[0] > 0.5 ? any1 : any0) = true;
        report.single_class_labels = !(any0 && any1);
    }

    const auto objective = lossnet.variant == LossVariant::Regression ? nn::Objective::Regression
                                                                      : nn::Objective::Binary;
    nn::TrainResult r = nn::train(lossnet.net, train_set, val_set, objective, cfg);
    lossnet.net = std::move(r.net);
    report.best_val_loss = r.best_val_loss;
    report.epochs_run = r.epochs_run;
    return report;
}

PolicyFitReport fit_policy(Policy& policy, const Dataset& dataset, const SplitIndices& indices,
                           const nn::TrainConfig& cfg) {
    if (indices.train.empty()) throw ConfigError("fit_policy: empty train split");
    const nn::SampleSet train_set = gather(dataset, indices.train, nullptr, true);
    const nn::SampleSet val_set = gather(dataset, indices.val, nullptr, true);
    nn::TrainResult r = nn::train(policy.net, train_set, val_set, nn::Objective::Regression, cfg);
    policy.net = std::move(r.net);
    return {r.best_val_loss, r.epochs_run};
}

}  // namespace qgil
