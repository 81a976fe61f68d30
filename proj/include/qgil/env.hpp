#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qgil/common.hpp"
#include "qgil/rng.hpp"

namespace qgil {

struct EnvSpec {
    std::string name;
    int obs_dim = 0;
    int action_dim = 0;
    int max_steps = 0;
    std::vector<std::array<double, 2>> action_bounds;  // per-dimension [low, high]
};

struct StepResult {
    Vec observation;
    double reward = 0.0;
    bool done = false;
};

// Episodic environment contract. Actions are clamped to the spec's bounds
// before dynamics. Stepping a finished episode is a contract error; reset
// first. Transitions are deterministic given (state, clamped action); all
// randomness enters through reset.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;

    // Draws a fresh initial state and returns the first observation.
    virtual Vec reset(RngStream& rng) = 0;

    virtual StepResult step(const Vec& action) = 0;

    // Scripted expert for the current internal state. Near-optimal by
    // construction; pure function of the state.
    virtual Vec expert_action() const = 0;

    // Documented bound on the per-step reward, [low, high].
    virtual std::array<double, 2> reward_range() const = 0;

    // Raw internal state, for diagnostics and replay. set_state starts a
    // fresh episode at exactly that state.
    virtual Vec state() const = 0;
    virtual void set_state(const Vec& raw) = 0;

    bool done() const { return done_; }

protected:
    void guard_not_done() const {
        if (done_) throw ContractError(spec().name + ": step after done; reset first");
    }

    Vec clamp_action(const Vec& action) const {
        const EnvSpec& s = spec();
        require_size(action, static_cast<std::size_t>(s.action_dim), "action");
        Vec a(action.size());
        for (std::size_t i = 0; i < action.size(); ++i) {
            a[i] = clamp(action[i], s.action_bounds[i][0], s.action_bounds[i][1]);
        }
        return a;
    }

    bool done_ = true;  // starts unusable until the first reset
    int steps_taken_ = 0;
};

// Registered environment names: "reach2d", "cliffcorridor".
std::vector<std::string> env_names();

// max_steps_override <= 0 keeps the environment's default horizon.
std::unique_ptr<Environment> make_env(const std::string& name, int max_steps_override = 0);

using PolicyFn = std::function<Vec(const Vec& observation)>;

// Runs one full episode under `policy` and returns the summed reward.
double episode_reward(Environment& env, const PolicyFn& policy, RngStream& rng);

// Expert policy as a PolicyFn bound to `env`. Only valid while driving that
// same environment instance.
PolicyFn expert_policy(Environment& env);

std::unique_ptr<Environment> make_reach2d(int max_steps_override);
std::unique_ptr<Environment> make_cliff_corridor(int max_steps_override);

}  // namespace qgil
