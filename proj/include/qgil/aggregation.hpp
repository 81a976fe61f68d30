#pragma once

#include <optional>

#include "qgil/dataset.hpp"
#include "qgil/heads.hpp"

namespace qgil {

struct RetrainResult {
    Policy policy;
    std::optional<LossNet> lossnet;
    double policy_val_loss = 0.0;
    double lossnet_val_loss = 0.0;
    bool lossnet_single_class = false;
};

// Retrains policy and (optionally) loss network from fresh initializations
// seeded by (experiment seed, iteration). Both heads share one 80/20 split,
// re-drawn over the full aggregated dataset each iteration.
RetrainResult retrain(const Dataset& dataset, const Policy& policy_arch,
                      const LossNet* lossnet_arch, const nn::TrainConfig& policy_cfg,
                      const nn::TrainConfig& lossnet_cfg, std::uint64_t experiment_seed,
                      int iteration, double val_fraction = 0.2);

struct PolicySnapshot {
    Policy policy;
    double val_loss = 0.0;
    int iteration = 0;
};

// Lowest validation loss wins; ties go to the latest snapshot.
const PolicySnapshot& select_best(const std::vector<PolicySnapshot>& snapshots);

}  // namespace qgil
