#pragma once

#include <optional>
#include <string>

#include "qgil/heads.hpp"
#include "qgil/rng.hpp"

namespace qgil {

enum class StrategyKind {
    Supervised,
    DAgger,
    Loss,
    SafeDAgger,
    LossGradient,
    SafeDaggerGradient,
    Random,
    LossGradientRandom,
    SafeDaggerGradientRandom,
};

struct Strategy {
    StrategyKind kind = StrategyKind::DAgger;
    double tau = 0.02;         // threshold on l-hat (Regression variants)
    double epsilon = 0.002;    // threshold on the input-gradient norm
    double p_query = 0.3;      // Random rule query probability
    double hybrid_coin = 0.5;  // P(gradient branch) for the hybrid strategies

    bool operator==(const Strategy&) const = default;
};

// CLI identifiers: supervised, dagger, loss, safedagger, loss-gradient,
// safedagger-gradient, random, loss-gradient-random, safedagger-gradient-random.
const char* strategy_name(StrategyKind kind);
std::optional<StrategyKind> strategy_from_name(const std::string& name);
std::vector<StrategyKind> all_strategies();

bool strategy_needs_lossnet(StrategyKind kind);
// Which loss-network variant the strategy pairs with (only meaningful when
// strategy_needs_lossnet).
LossVariant strategy_lossnet_variant(StrategyKind kind);
bool strategy_uses_gradient(StrategyKind kind);
bool strategy_is_hybrid(StrategyKind kind);

enum class FiredRule { None, Threshold, Gradient, Random, Always };

const char* fired_rule_name(FiredRule rule);

// Auditable query verdict: the boolean plus the rule that fired and the
// signals that were actually computed.
struct QueryDecision {
    bool query = false;
    FiredRule fired_rule = FiredRule::None;
    std::optional<double> l_hat;
    std::optional<double> grad_norm;

    bool operator==(const QueryDecision&) const = default;
};

// Decision kernel on precomputed signals. `grad_norm` may be absent when the
// caller knows the threshold already fired; it must be present when the
// gradient rule has to be consulted. Used by should_query and by decision-log
// replays.
QueryDecision decide_from_signals(const Strategy& strategy, std::optional<double> l_hat,
                                  std::optional<double> grad_norm);

// Full per-timestep decision. The lossnet must be present exactly for the
// strategies that need one. query_rng feeds the Random rule, coin_rng the
// hybrid coin; keeping them separate makes the hybrid's branches match the
// pure strategies draw-for-draw.
QueryDecision should_query(const Strategy& strategy, const LossNet* lossnet,
                           const Vec& observation, const Vec& proposed_action,
                           RngStream& query_rng, RngStream& coin_rng);

// Executes the verdict: the expert action when querying, the proposal
// otherwise. Querying without an expert action is a contract error.
Vec execute_choice(const QueryDecision& decision, const Vec& proposed_action,
                   const std::optional<Vec>& expert_action);

}  // namespace qgil
