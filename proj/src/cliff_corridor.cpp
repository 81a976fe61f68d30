#include <cmath>

#include "qgil/env.hpp"

namespace qgil {

namespace {

// Point mass driving down a corridor. Kinematic car with heading and speed;
// leaving the corridor laterally ends the episode with a failure penalty,
// which is what makes behaviour-cloned policies degrade here. The expert is
// a PD lane keeper plus a cruise controller with drag feed-forward.
constexpr double kDt = 0.05;
constexpr int kDefaultHorizon = 200;
constexpr double kHalfWidth = 1.0;
constexpr double kSteerRate = 2.0;   // rad/s per unit steer
constexpr double kThrustAccel = 2.0;
constexpr double kDrag = 0.4;
constexpr double kCruiseSpeed = 2.0;
constexpr double kFailPenalty = 10.0;
constexpr double kLateralPenalty = 0.05;
constexpr double kProgressRef = kCruiseSpeed * kDefaultHorizon * kDt;  // nominal track length
// Expert gains.
constexpr double kLaneP = 1.2;       // lateral position
constexpr double kLaneD = 1.0;       // lateral velocity
constexpr double kHeadingP = 1.5;
constexpr double kSpeedP = 1.0;

class CliffCorridor final : public Environment {
public:
    explicit CliffCorridor(int max_steps_override) {
        spec_.name = "cliffcorridor";
        spec_.obs_dim = 6;
        spec_.action_dim = 2;
        spec_.max_steps = max_steps_override > 0 ? max_steps_override : kDefaultHorizon;
        spec_.action_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    }

    const EnvSpec& spec() const override { return spec_; }

    Vec reset(RngStream& rng) override {
        x_ = 0.0;
        y_ = rng.uniform(-0.4, 0.4) * kHalfWidth;
        heading_ = rng.uniform(-0.2, 0.2);
        speed_ = rng.uniform(0.5, 1.5);
        steps_taken_ = 0;
        done_ = false;
        return observation();
    }

    StepResult step(const Vec& action) override {
        guard_not_done();
        const Vec a = clamp_action(action);
        heading_ += kDt * kSteerRate * a[0];
        speed_ += kDt * (kThrustAccel * a[1] - kDrag * speed_);
        const double dx = kDt * speed_ * std::cos(heading_);
        x_ += dx;
        y_ += kDt * speed_ * std::sin(heading_);
        ++steps_taken_;

        StepResult result;
        result.reward = dx - kLateralPenalty * std::fabs(y_);
        if (std::fabs(y_) > kHalfWidth) {
            result.reward -= kFailPenalty;
            done_ = true;
        } else {
            done_ = steps_taken_ >= spec_.max_steps;
        }
        result.done = done_;
        result.observation = observation();
        return result;
    }

    Vec expert_action() const override {
        guard_not_done();
        const double lateral_vel = speed_ * std::sin(heading_);
        const double steer =
            clamp(-kLaneP * y_ - kLaneD * lateral_vel - kHeadingP * heading_, -1.0, 1.0);
        const double thrust =
            clamp(kSpeedP * (kCruiseSpeed - speed_) + cruise_thrust(), -1.0, 1.0);
        return {steer, thrust};
    }

    // Feed-forward thrust that holds the cruise speed against drag.
    static double cruise_thrust() { return kDrag * kCruiseSpeed / kThrustAccel; }

    std::array<double, 2> reward_range() const override {
        // |speed| is bounded by the drag equilibrium kThrustAccel / kDrag. On a
        // terminating step |y| can overshoot the corridor edge by one step.
        const double vmax = kThrustAccel / kDrag;
        const double ymax = kHalfWidth + kDt * vmax;
        return {-kDt * vmax - kLateralPenalty * ymax - kFailPenalty, kDt * vmax};
    }

    // (x, y, heading, speed)
    Vec state() const override { return {x_, y_, heading_, speed_}; }

    void set_state(const Vec& raw) override {
        require_size(raw, 4, "cliffcorridor state");
        x_ = raw[0];
        y_ = raw[1];
        heading_ = raw[2];
        speed_ = raw[3];
        steps_taken_ = 0;
        done_ = false;
    }

private:
    Vec observation() const {
        return {y_,       speed_ * std::sin(heading_), heading_,
                speed_ * std::cos(heading_), kHalfWidth,  x_ / kProgressRef};
    }

    EnvSpec spec_;
    double x_ = 0.0, y_ = 0.0;
    double heading_ = 0.0, speed_ = 0.0;
};

}  // namespace

std::unique_ptr<Environment> make_cliff_corridor(int max_steps_override) {
    return std::make_unique<CliffCorridor>(max_steps_override);
}

}  // namespace qgil
