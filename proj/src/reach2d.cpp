#include <cmath>

#include "qgil/env.hpp"

namespace qgil {

namespace {

// Two-link planar arm chasing a random target. Torque-driven joints with
// viscous damping, semi-implicit Euler at dt. The expert is a damped
// inverse-kinematics proportional controller: cartesian error -> desired
// fingertip velocity -> joint velocities via damped least squares -> torque
// via a velocity-tracking P term.
constexpr double kLink1 = 0.1;
constexpr double kLink2 = 0.1;
constexpr double kDt = 0.05;
constexpr int kDefaultHorizon = 50;
constexpr double kTorqueGain = 40.0;   // rad/s^2 per unit torque
constexpr double kDamping = 4.0;       // 1/s viscous joint damping
constexpr double kCtrlPenalty = 0.01;
constexpr double kTargetRadiusLo = 0.05;
constexpr double kTargetRadiusHi = 0.18;
// Expert gains.
constexpr double kCartGain = 8.0;      // cartesian error -> velocity
constexpr double kCartVelMax = 1.2;
constexpr double kJointVelGain = 4.0;  // joint velocity error -> torque
constexpr double kDlsLambda = 0.05;    // damped least squares regularizer

class Reach2D final : public Environment {
public:
    explicit Reach2D(int max_steps_override) {
        spec_.name = "reach2d";
        spec_.obs_dim = 8;
        spec_.action_dim = 2;
        spec_.max_steps = max_steps_override > 0 ? max_steps_override : kDefaultHorizon;
        spec_.action_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    }

    const EnvSpec& spec() const override { return spec_; }

    Vec reset(RngStream& rng) override {
        q1_ = rng.uniform(-M_PI, M_PI);
        q2_ = rng.uniform(-2.6, 2.6);  // keep clear of the folded-arm singularity
        w1_ = 0.0;
        w2_ = 0.0;
        const double radius = rng.uniform(kTargetRadiusLo, kTargetRadiusHi);
        const double angle = rng.uniform(-M_PI, M_PI);
        tx_ = radius * std::cos(angle);
        ty_ = radius * std::sin(angle);
        steps_taken_ = 0;
        done_ = false;
        return observation();
    }

    StepResult step(const Vec& action) override {
        guard_not_done();
        const Vec a = clamp_action(action);
        w1_ += kDt * (kTorqueGain * a[0] - kDamping * w1_);
        w2_ += kDt * (kTorqueGain * a[1] - kDamping * w2_);
        q1_ = wrap_angle(q1_ + kDt * w1_);
        q2_ = wrap_angle(q2_ + kDt * w2_);
        ++steps_taken_;
        done_ = steps_taken_ >= spec_.max_steps;

        StepResult result;
        result.reward = -distance_to_target() - kCtrlPenalty * (a[0] * a[0] + a[1] * a[1]);
        result.done = done_;
        result.observation = observation();
        return result;
    }

    Vec expert_action() const override {
        guard_not_done();
        const auto [fx, fy] = fingertip();
        double vx = kCartGain * (tx_ - fx);
        double vy = kCartGain * (ty_ - fy);
        const double speed = std::sqrt(vx * vx + vy * vy);
        if (speed > kCartVelMax) {
            vx *= kCartVelMax / speed;
            vy *= kCartVelMax / speed;
        }

        // J = d(fingertip)/d(q), damped least squares: qdot = J^T (J J^T + l^2 I)^-1 v.
        const double s1 = std::sin(q1_), c1 = std::cos(q1_);
        const double s12 = std::sin(q1_ + q2_), c12 = std::cos(q1_ + q2_);
        const double j11 = -kLink1 * s1 - kLink2 * s12, j12 = -kLink2 * s12;
        const double j21 = kLink1 * c1 + kLink2 * c12, j22 = kLink2 * c12;

        const double g11 = j11 * j11 + j12 * j12 + kDlsLambda * kDlsLambda;
        const double g12 = j11 * j21 + j12 * j22;
        const double g22 = j21 * j21 + j22 * j22 + kDlsLambda * kDlsLambda;
        const double det = g11 * g22 - g12 * g12;
        const double u1 = (g22 * vx - g12 * vy) / det;
        const double u2 = (-g12 * vx + g11 * vy) / det;
        const double qd1 = j11 * u1 + j21 * u2;
        const double qd2 = j12 * u1 + j22 * u2;

        return {clamp(kJointVelGain * (qd1 - w1_), -1.0, 1.0),
                clamp(kJointVelGain * (qd2 - w2_), -1.0, 1.0)};
    }

    std::array<double, 2> reward_range() const override {
        // Max fingertip-target distance is 2*(l1+l2) + target radius.
        return {-(2.0 * (kLink1 + kLink2) + kTargetRadiusHi) - 2.0 * kCtrlPenalty, 0.0};
    }

    // (q1, q2, w1, w2, target_x, target_y)
    Vec state() const override { return {q1_, q2_, w1_, w2_, tx_, ty_}; }

    void set_state(const Vec& raw) override {
        require_size(raw, 6, "reach2d state");
        q1_ = raw[0];
        q2_ = raw[1];
        w1_ = raw[2];
        w2_ = raw[3];
        tx_ = raw[4];
        ty_ = raw[5];
        steps_taken_ = 0;
        done_ = false;
    }

private:
    static double wrap_angle(double a) {
        while (a > M_PI) a -= 2.0 * M_PI;
        while (a < -M_PI) a += 2.0 * M_PI;
        return a;
    }

    std::pair<double, double> fingertip() const {
        return {kLink1 * std::cos(q1_) + kLink2 * std::cos(q1_ + q2_),
                kLink1 * std::sin(q1_) + kLink2 * std::sin(q1_ + q2_)};
    }

    double distance_to_target() const {
        const auto [fx, fy] = fingertip();
        return std::hypot(fx - tx_, fy - ty_);
    }

    Vec observation() const {
        return {std::cos(q1_), std::sin(q1_), std::cos(q2_), std::sin(q2_), w1_, w2_, tx_, ty_};
    }

    EnvSpec spec_;
    double q1_ = 0.0, q2_ = 0.0;  // joint angles
    double w1_ = 0.0, w2_ = 0.0;  // angular velocities
    double tx_ = 0.0, ty_ = 0.0;  // target
};

}  // namespace

std::unique_ptr<Environment> make_reach2d(int max_steps_override) {
    return std::make_unique<Reach2D>(max_steps_override);
}

}  // namespace qgil
