#include "qgil/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace qgil {

namespace {

// Disjoint stream families per run; iteration/episode indices are mixed in
// below so adding iterations never perturbs earlier draws.
constexpr std::uint64_t kTagBootstrap = 0x01;
constexpr std::uint64_t kTagRolloutEnv = 0x02;
constexpr std::uint64_t kTagRolloutQuery = 0x03;
constexpr std::uint64_t kTagRolloutCoin = 0x04;
constexpr std::uint64_t kTagEvalAgent = 0x05;
constexpr std::uint64_t kTagEvalExpert = 0x06;
constexpr std::uint64_t kTagSplitSeed = 0x07;

void validate(const ExperimentConfig& cfg) {
    if (cfg.iterations < 1) throw ConfigError("experiment: iterations must be >= 1");
    if (cfg.episodes_per_iteration < 1) throw ConfigError("experiment: episodes must be >= 1");
    if (cfg.eval_trials < 2) throw ConfigError("experiment: eval_trials must be >= 2");
    if (cfg.bootstrap_episodes < 1) throw ConfigError("experiment: bootstrap_episodes >= 1");
    if (!(cfg.query_budget > 0.0)) throw ConfigError("experiment: query_budget must be positive");
    if (cfg.strategy.p_query < 0.0 || cfg.strategy.p_query > 1.0) {
        throw ConfigError("experiment: p_query must lie in [0,1]");
    }
}

}  // namespace

EvalStats evaluate(Environment& env, const PolicyFn& policy, int trials, std::uint64_t seed) {
    if (trials < 2) throw ConfigError("evaluate: trials must be >= 2 for a defined std");
    double s = 0.0, s2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        const double r = episode_reward(env, policy, rng);
        s += r;
        s2 += r * r;
    }
    const double mean = s / trials;
    const double var = std::max(0.0, (s2 - trials * mean * mean) / (trials - 1));
    return {mean, std::sqrt(var)};
}

double loss_vs_expert(double agent_mean_reward, double expert_mean_reward) {
    if (!std::isfinite(agent_mean_reward) || !std::isfinite(expert_mean_reward)) {
        throw ContractError("loss_vs_expert: non-finite reward");
    }
    return expert_mean_reward - agent_mean_reward;
}

double query_efficiency(double agent_loss, double supervised_loss, long long query_count,
                        double scale) {
    if (query_count < 1) throw ContractError("query_efficiency: query_count must be >= 1");
    return scale * (supervised_loss - agent_loss) / static_cast<double>(query_count);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (strategy_needs_lossnet(cfg.strategy.kind) && cfg.strategy.tau <= 0.0 &&
        strategy_lossnet_variant(cfg.strategy.kind) == LossVariant::Regression) {
        throw ConfigError("experiment: regression-variant strategies need tau > 0");
    }

    auto env = make_env(cfg.env_name, cfg.horizon);
    const EnvSpec& spec = env->spec();
    const long long budget =
        std::isinf(cfg.query_budget) ? -1 : static_cast<long long>(cfg.query_budget);

    RunResult result;
    result.config = cfg;

    // The supervised baseline trains on expert rollouts only; its bootstrap is
    // scaled to DAgger's total query count under the same config for a fair
    // efficiency denominator.
    const bool supervised = cfg.strategy.kind == StrategyKind::Supervised;
    const int bootstrap_episodes =
        supervised
            ? cfg.bootstrap_episodes + cfg.iterations * cfg.episodes_per_iteration
            : cfg.bootstrap_episodes;

    RngStream bootstrap_rng(mix_seed(cfg.seed, kTagBootstrap));
    Dataset dataset = bootstrap(*env, bootstrap_episodes, bootstrap_rng,
                                mix_seed(cfg.seed, kTagSplitSeed), budget);

    const bool needs_lossnet = strategy_needs_lossnet(cfg.strategy.kind);
    const Policy policy_arch = Policy::make(spec.obs_dim, spec.action_dim);
    std::optional<LossNet> lossnet_arch;
    if (needs_lossnet) {
        lossnet_arch = LossNet::make(spec.obs_dim, spec.action_dim,
                                     strategy_lossnet_variant(cfg.strategy.kind),
                                     cfg.strategy.tau);
    }

    // Expert baseline under the same trial count, on a dedicated stream.
    const EvalStats expert_stats = evaluate(*env, expert_policy(*env), cfg.eval_trials,
                                            mix_seed(cfg.seed, kTagEvalExpert));
    result.expert_mean_reward = expert_stats.mean;
    result.expert_reward_std = expert_stats.stddev;

    // Iteration 0: fit the initial policy / loss network on the bootstrap set.
    RetrainResult heads = retrain(dataset, policy_arch,
                                  lossnet_arch ? &*lossnet_arch : nullptr, cfg.policy_train,
                                  cfg.lossnet_train, cfg.seed, 0);

    std::vector<PolicySnapshot> snapshots;
    for (int iteration = 1; iteration <= cfg.iterations; ++iteration) {
        const auto it = static_cast<std::uint64_t>(iteration);
        for (int episode = 0; episode < cfg.episodes_per_iteration; ++episode) {
            const auto ep = static_cast<std::uint64_t>(episode);
            RngStream env_rng(mix_seed(cfg.seed, kTagRolloutEnv, it, ep));
            RngStream query_rng(mix_seed(cfg.seed, kTagRolloutQuery, it, ep));
            RngStream coin_rng(mix_seed(cfg.seed, kTagRolloutCoin, it, ep));

            Vec obs = env->reset(env_rng);
            int step_index = 0;
            while (!env->done()) {
                const Vec proposed = propose_action(heads.policy, obs);
                const bool budget_blocked =
                    budget >= 0 && count_queries(dataset) >= budget;
                QueryDecision decision;
                if (!budget_blocked) {
                    decision = should_query(cfg.strategy,
                                            heads.lossnet ? &*heads.lossnet : nullptr, obs,
                                            proposed, query_rng, coin_rng);
                }
                std::optional<Vec> expert;
                if (decision.query) expert = env->expert_action();
                const Vec chosen = execute_choice(decision, proposed, expert);
                if (decision.query) {
                    aggregate(dataset, DemoRecord{obs, proposed, *expert, iteration,
                                                  RecordSource::Queried});
                }
                if (cfg.log_decisions) {
                    result.decisions.push_back(
                        {iteration, episode, step_index, decision, budget_blocked});
                }
                obs = env->step(chosen).observation;
                ++step_index;
            }
        }

        heads = retrain(dataset, policy_arch, lossnet_arch ? &*lossnet_arch : nullptr,
                        cfg.policy_train, cfg.lossnet_train, cfg.seed, iteration);
        snapshots.push_back({heads.policy, heads.policy_val_loss, iteration});

        const Policy& current = heads.policy;
        const EvalStats agent_stats =
            evaluate(*env, [&current](const Vec& o) { return propose_action(current, o); },
                     cfg.eval_trials, mix_seed(cfg.seed, kTagEvalAgent, it));

        IterationMetrics row;
        row.iteration = iteration;
        row.mean_loss_vs_expert = loss_vs_expert(agent_stats.mean, expert_stats.mean);
        row.loss_std = agent_stats.stddev;
        row.cumulative_queries = count_queries(dataset);
        if (cfg.supervised_reference_loss.has_value()) {
            row.efficiency = query_efficiency(row.mean_loss_vs_expert,
                                              *cfg.supervised_reference_loss,
                                              row.cumulative_queries);
        }
        result.metrics.push_back(row);
    }

    const PolicySnapshot& best = select_best(snapshots);
    result.best_policy = best.policy;
    result.best_iteration = best.iteration;
    result.best_val_loss = best.val_loss;
    result.dataset = std::move(dataset);
    return result;
}

void write_run_csv(std::ostream& out, const RunResult& result) {
    // Loss is (expert - agent) mean episode reward; rewards are per-episode
    // totals. err is the agent's reward standard deviation over eval trials.
    out << "# env=" << result.config.env_name
        << " strategy=" << strategy_name(result.config.strategy.kind)
        << " seed=" << result.config.seed
        << "; reward = per-episode total; loss = expert_mean - agent_mean\n";
    out << "iteration,loss,err,total_obs\n";
    char buf[96];
    for (const IterationMetrics& m : result.metrics) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%lld\n", m.iteration,
                      m.mean_loss_vs_expert, m.loss_std, m.cumulative_queries);
        out << buf;
    }
}

std::string run_csv_string(const RunResult& result) {
    std::ostringstream ss;
    write_run_csv(ss, result);
    return ss.str();
}

}  // namespace qgil
