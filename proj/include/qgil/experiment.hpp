#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>

#include "qgil/aggregation.hpp"
#include "qgil/strategy.hpp"

namespace qgil {

struct ExperimentConfig {
    std::string env_name = "reach2d";
    Strategy strategy{};
    int iterations = 15;             // M
    int episodes_per_iteration = 10; // N
    int horizon = 0;                 // T override; 0 keeps the env default
    int eval_trials = 100;
    int bootstrap_episodes = 5;
    double query_budget = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    nn::TrainConfig policy_train{};
    nn::TrainConfig lossnet_train{};
    bool log_decisions = false;
    // When set, per-iteration efficiency is reported against this supervised
    // loss; suites fill their summaries in from their own supervised row.
    std::optional<double> supervised_reference_loss;

    bool operator==(const ExperimentConfig&) const = default;
};

struct IterationMetrics {
    int iteration = 0;
    double mean_loss_vs_expert = 0.0;
    double loss_std = 0.0;
    long long cumulative_queries = 0;
    double efficiency = std::numeric_limits<double>::quiet_NaN();
};

struct DecisionLogRow {
    int iteration = 0;
    int episode = 0;
    int step = 0;
    QueryDecision decision{};
    bool budget_blocked = false;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<IterationMetrics> metrics;
    Policy best_policy;
    int best_iteration = 0;
    double best_val_loss = 0.0;
    double expert_mean_reward = 0.0;
    double expert_reward_std = 0.0;
    Dataset dataset;
    std::vector<DecisionLogRow> decisions;  // populated when config.log_decisions

    const IterationMetrics& final_metrics() const { return metrics.back(); }
};

struct EvalStats {
    double mean = 0.0;
    double stddev = 0.0;
};

// Runs `trials` independent episodes (per-trial child seeds) and reports the
// sample mean and n-1 standard deviation of the episode rewards.
EvalStats evaluate(Environment& env, const PolicyFn& policy, int trials, std::uint64_t seed);

// Performance measure used throughout: expert mean reward minus agent mean
// reward. Negative when the agent out-rewards the expert.
double loss_vs_expert(double agent_mean_reward, double expert_mean_reward);

// scale * (supervised_loss - agent_loss) / query_count. query_count must be
// positive; report "na" upstream instead of calling this with zero.
double query_efficiency(double agent_loss, double supervised_loss, long long query_count,
                        double scale = 1e4);

// The full interaction loop: bootstrap, M iterations of N gated rollouts,
// retrain + evaluate per iteration, best-on-validation selection.
RunResult run_experiment(const ExperimentConfig& cfg);

// CSV with columns iteration,loss,err,total_obs (one row per iteration).
void write_run_csv(std::ostream& out, const RunResult& result);
std::string run_csv_string(const RunResult& result);

}  // namespace qgil
