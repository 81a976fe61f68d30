#include "qgil/strategy.hpp"

namespace qgil {

const char* strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Supervised: return "supervised";
        case StrategyKind::DAgger: return "dagger";
        case StrategyKind::Loss: return "loss";
        case StrategyKind::SafeDAgger: return "safedagger";
        case StrategyKind::LossGradient: return "loss-gradient";
        case StrategyKind::SafeDaggerGradient: return "safedagger-gradient";
        case StrategyKind::Random: return "random";
        case StrategyKind::LossGradientRandom: return "loss-gradient-random";
        case StrategyKind::SafeDaggerGradientRandom: return "safedagger-gradient-random";
    }
    return "?";
}

std::optional<StrategyKind> strategy_from_name(const std::string& name) {
    for (StrategyKind k : all_strategies()) {
        if (name == strategy_name(k)) return k;
    }
    return std::nullopt;
}

std::vector<StrategyKind> all_strategies() {
    return {StrategyKind::Supervised,
            StrategyKind::DAgger,
            StrategyKind::Loss,
            StrategyKind::SafeDAgger,
            StrategyKind::LossGradient,
            StrategyKind::SafeDaggerGradient,
            StrategyKind::Random,
            StrategyKind::LossGradientRandom,
            StrategyKind::SafeDaggerGradientRandom};
}

bool strategy_needs_lossnet(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Supervised:
        case StrategyKind::DAgger:
        case StrategyKind::Random:
            return false;
        default:
            return true;
    }
}

LossVariant strategy_lossnet_variant(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::SafeDAgger:
        case StrategyKind::SafeDaggerGradient:
        case StrategyKind::SafeDaggerGradientRandom:
            return LossVariant::Classifier;
        default:
            return LossVariant::Regression;
    }
}

bool strategy_uses_gradient(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::LossGradient:
        case StrategyKind::SafeDaggerGradient:
        case StrategyKind::LossGradientRandom:
        case StrategyKind::SafeDaggerGradientRandom:
            return true;
        default:
            return false;
    }
}

bool strategy_is_hybrid(StrategyKind kind) {
    return kind == StrategyKind::LossGradientRandom ||
           kind == StrategyKind::SafeDaggerGradientRandom;
}

const char* fired_rule_name(FiredRule rule) {
    switch (rule) {
        case FiredRule::None: return "none";
        case FiredRule::Threshold: return "threshold";
        case FiredRule::Gradient: return "gradient";
        case FiredRule::Random: return "random";
        case FiredRule::Always: return "always";
    }
    return "?";
}

namespace {

// The threshold l-hat is compared against: tau for the Regression variants,
// 1/2 for the Classifier (probability) variants.
double lhat_threshold(const Strategy& strategy, StrategyKind kind) {
    return strategy_lossnet_variant(kind) == LossVariant::Classifier ? 0.5 : strategy.tau;
}

QueryDecision decide_gradient_family(const Strategy& strategy, StrategyKind base_kind,
                                     std::optional<double> l_hat,
                                     std::optional<double> grad_norm, bool with_gradient) {
    QueryDecision d;
    d.l_hat = l_hat;
    if (!l_hat.has_value()) throw ConfigError("decision: l_hat required for this strategy");
    if (*l_hat > lhat_threshold(strategy, base_kind)) {
        d.query = true;
        d.fired_rule = FiredRule::Threshold;
        return d;
    }
    if (with_gradient) {
        if (!grad_norm.has_value()) throw ConfigError("decision: grad_norm required");
        d.grad_norm = grad_norm;
        if (*grad_norm > strategy.epsilon) {
            d.query = true;
            d.fired_rule = FiredRule::Gradient;
            return d;
        }
    }
    return d;  // query = false, fired_rule = None
}

}  // namespace

QueryDecision decide_from_signals(const Strategy& strategy, std::optional<double> l_hat,
                                  std::optional<double> grad_norm) {
    switch (strategy.kind) {
        case StrategyKind::Supervised:
            return {};
        case StrategyKind::DAgger:
            return {true, FiredRule::Always, std::nullopt, std::nullopt};
        case StrategyKind::Loss:
        case StrategyKind::SafeDAgger:
            return decide_gradient_family(strategy, strategy.kind, l_hat, std::nullopt, false);
        case StrategyKind::LossGradient:
        case StrategyKind::SafeDaggerGradient:
            return decide_gradient_family(strategy, strategy.kind, l_hat, grad_norm, true);
        default:
            throw ConfigError("decide_from_signals: random draws need should_query");
    }
}

QueryDecision should_query(const Strategy& strategy, const LossNet* lossnet,
                           const Vec& observation, const Vec& proposed_action,
                           RngStream& query_rng, RngStream& coin_rng) {
    const StrategyKind kind = strategy.kind;
    if (strategy_needs_lossnet(kind) && lossnet == nullptr) {
        throw ConfigError(std::string("strategy ") + strategy_name(kind) +
                          " requires a loss network");
    }
    if (lossnet != nullptr && strategy_needs_lossnet(kind) &&
        lossnet->variant != strategy_lossnet_variant(kind)) {
        throw ConfigError(std::string("strategy ") + strategy_name(kind) +
                          " is paired with the wrong loss-network variant");
    }

    auto random_rule = [&]() {
        QueryDecision d;
        if (query_rng.uniform() < strategy.p_query) {
            d.query = true;
            d.fired_rule = FiredRule::Random;
        }
        return d;
    };

    auto gradient_rule = [&](StrategyKind base) {
        const double l_hat = loss_estimate(*lossnet, observation, proposed_action);
        Strategy base_strategy = strategy;
        base_strategy.kind = base;
        if (l_hat > lhat_threshold(strategy, base)) {
            return decide_from_signals(base_strategy, l_hat, std::nullopt);
        }
        const double grad = risk_gradient_norm(*lossnet, observation, proposed_action);
        return decide_from_signals(base_strategy, l_hat, grad);
    };

    switch (kind) {
        case StrategyKind::Supervised:
        case StrategyKind::DAgger:
            return decide_from_signals(strategy, std::nullopt, std::nullopt);
        case StrategyKind::Random:
            return random_rule();
        case StrategyKind::Loss:
        case StrategyKind::SafeDAgger: {
            const double l_hat = loss_estimate(*lossnet, observation, proposed_action);
            return decide_from_signals(strategy, l_hat, std::nullopt);
        }
        case StrategyKind::LossGradient:
            return gradient_rule(StrategyKind::LossGradient);
        case StrategyKind::SafeDaggerGradient:
            return gradient_rule(StrategyKind::SafeDaggerGradient);
        case StrategyKind::LossGradientRandom:
            return coin_rng.uniform() < strategy.hybrid_coin
                       ? gradient_rule(StrategyKind::LossGradient)
                       : random_rule();
        case StrategyKind::SafeDaggerGradientRandom:
            return coin_rng.uniform() < strategy.hybrid_coin
                       ? gradient_rule(StrategyKind::SafeDaggerGradient)
                       : random_rule();
    }
    throw ConfigError("should_query: unhandled strategy");
}

Vec execute_choice(const QueryDecision& decision, const Vec& proposed_action,
                   const std::optional<Vec>& expert_action) {
    if (decision.query) {
        if (!expert_action.has_value()) {
            throw ContractError("execute_choice: queried but no expert action supplied");
        }
        return *expert_action;
    }
    return proposed_action;
}

}  // namespace qgil
