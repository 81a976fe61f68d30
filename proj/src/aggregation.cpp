#include "qgil/aggregation.hpp"

namespace qgil {

namespace {

// Stream tags for per-iteration reinitialization and splitting.
constexpr std::uint64_t kTagPolicyInit = 0x11;
constexpr std::uint64_t kTagLossnetInit = 0x12;
constexpr std::uint64_t kTagPolicyTrain = 0x13;
constexpr std::uint64_t kTagLossnetTrain = 0x14;
constexpr std::uint64_t kTagSplit = 0x15;

}  // namespace

RetrainResult retrain(const Dataset& dataset, const Policy& policy_arch,
                      const LossNet* lossnet_arch, const nn::TrainConfig& policy_cfg,
                      const nn::TrainConfig& lossnet_cfg, std::uint64_t experiment_seed,
                      int iteration, double val_fraction) {
    if (dataset.records.empty()) throw ConfigError("retrain: empty dataset");
    const auto it = static_cast<std::uint64_t>(iteration);
    const SplitIndices indices =
        split(dataset, val_fraction, mix_seed(dataset.split_seed, kTagSplit, it));

    RetrainResult result;
    result.policy = policy_arch;
    {
        RngStream init(mix_seed(experiment_seed, kTagPolicyInit, it));
        result.policy.net.init_weights(init);
        nn::TrainConfig cfg = policy_cfg;
        cfg.seed = mix_seed(experiment_seed, kTagPolicyTrain, it);
        result.policy_val_loss = fit_policy(result.policy, dataset, indices, cfg).best_val_loss;
    }
    if (lossnet_arch != nullptr) {
        LossNet ln = *lossnet_arch;
        RngStream init(mix_seed(experiment_seed, kTagLossnetInit, it));
        ln.net.init_weights(init);
        nn::TrainConfig cfg = lossnet_cfg;
        cfg.seed = mix_seed(experiment_seed, kTagLossnetTrain, it);
        const LossnetFitReport report = fit_lossnet(ln, dataset, indices, cfg);
        result.lossnet_val_loss = report.best_val_loss;
        result.lossnet_single_class = report.single_class_labels;
        result.lossnet = std::move(ln);
    }
    return result;
}

const PolicySnapshot& select_best(const std::vector<PolicySnapshot>& snapshots) {
    if (snapshots.empty()) throw ConfigError("select_best: no snapshots");
    std::size_t best = 0;
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (snapshots[i].val_loss <= snapshots[best].val_loss) best = i;
    }
    return snapshots[best];
}

}  // namespace qgil
