#include "qgil/env.hpp"

namespace qgil {

std::vector<std::string> env_names() { return {"reach2d", "cliffcorridor"}; }

std::unique_ptr<Environment> make_env(const std::string& name, int max_steps_override) {
    if (name == "reach2d") return make_reach2d(max_steps_override);
    if (name == "cliffcorridor") return make_cliff_corridor(max_steps_override);
    throw ConfigError("unknown environment: " + name);
}

double episode_reward(Environment& env, const PolicyFn& policy, RngStream& rng) {
    Vec obs = env.reset(rng);
    double total = 0.0;
    while (!env.done()) {
        StepResult r = env.step(policy(obs));
        total += r.reward;
        obs = std::move(r.observation);
    }
    return total;
}

PolicyFn expert_policy(Environment& env) {
    return [&env](const Vec&) { return env.expert_action(); };
}

}  // namespace qgil
