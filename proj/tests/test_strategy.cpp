#include <cmath>

#include "doctest.h"
#include "qgil/strategy.hpp"

using namespace qgil;

namespace {

// Linear regression lossnet whose l-hat is |w . [s; a]| with w = (c, 0, 0);
// handy for dialing exact signal values.
LossNet linear_lossnet(double c) {
    LossNet ln;
    ln.variant = LossVariant::Regression;
    ln.tau = 0.02;
    ln.net = nn::Mlp::make({3, 1}, nn::OutputActivation::Identity);
    ln.net.weights[0] = {c, 0.0, 0.0};
    return ln;
}

Strategy make_strategy(StrategyKind kind, double tau = 0.02, double eps = 0.002) {
    Strategy s;
    s.kind = kind;
    s.tau = tau;
    s.epsilon = eps;
    return s;
}

}  // namespace

TEST_CASE("strategy names round-trip and cover all nine") {
    const auto all = all_strategies();
    REQUIRE(all.size() == 9);
    for (StrategyKind k : all) {
        const auto back = strategy_from_name(strategy_name(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK(!strategy_from_name("bagger").has_value());
    CHECK(std::string(strategy_name(StrategyKind::LossGradientRandom)) == "loss-gradient-random");
}

TEST_CASE("lossnet pairing table") {
    CHECK_FALSE(strategy_needs_lossnet(StrategyKind::Supervised));
    CHECK_FALSE(strategy_needs_lossnet(StrategyKind::DAgger));
    CHECK_FALSE(strategy_needs_lossnet(StrategyKind::Random));
    CHECK(strategy_needs_lossnet(StrategyKind::Loss));
    CHECK(strategy_lossnet_variant(StrategyKind::Loss) == LossVariant::Regression);
    CHECK(strategy_lossnet_variant(StrategyKind::LossGradientRandom) == LossVariant::Regression);
    CHECK(strategy_lossnet_variant(StrategyKind::SafeDAgger) == LossVariant::Classifier);
    CHECK(strategy_lossnet_variant(StrategyKind::SafeDaggerGradientRandom) ==
          LossVariant::Classifier);
}

TEST_CASE("decision kernel: threshold rule (tau 0.02, l-hat 0.03 queries)") {
    const Strategy loss = make_strategy(StrategyKind::Loss);
    const QueryDecision d = decide_from_signals(loss, 0.03, std::nullopt);
    CHECK(d.query);
    CHECK(d.fired_rule == FiredRule::Threshold);
    CHECK(d.l_hat == 0.03);

    const QueryDecision quiet = decide_from_signals(loss, 0.01, std::nullopt);
    CHECK_FALSE(quiet.query);
    CHECK(quiet.fired_rule == FiredRule::None);
}

TEST_CASE("decision kernel: gradient rule fires when threshold does not") {
    const Strategy lg = make_strategy(StrategyKind::LossGradient, 0.02, 0.002);
    const QueryDecision d = decide_from_signals(lg, 0.01, 0.003);
    CHECK(d.query);
    CHECK(d.fired_rule == FiredRule::Gradient);
    CHECK(d.l_hat == 0.01);
    CHECK(d.grad_norm == 0.003);

    const QueryDecision th = decide_from_signals(lg, 0.03, 0.003);
    CHECK(th.fired_rule == FiredRule::Threshold);  // threshold takes precedence
    CHECK_FALSE(th.grad_norm.has_value());

    const QueryDecision none = decide_from_signals(lg, 0.01, 0.001);
    CHECK_FALSE(none.query);
    CHECK(none.fired_rule == FiredRule::None);
}

TEST_CASE("dagger always queries; supervised never does") {
    RngStream q(1), c(2);
    const QueryDecision d = should_query(make_strategy(StrategyKind::DAgger), nullptr,
                                         {0.0}, {0.0}, q, c);
    CHECK(d.query);
    CHECK(d.fired_rule == FiredRule::Always);

    const QueryDecision s = should_query(make_strategy(StrategyKind::Supervised), nullptr,
                                         {0.0}, {0.0}, q, c);
    CHECK_FALSE(s.query);
    CHECK(s.fired_rule == FiredRule::None);
}

TEST_CASE("random rule: frequency near p over 10000 draws") {
    Strategy s = make_strategy(StrategyKind::Random);
    s.p_query = 0.3;
    RngStream q(99), c(1);
    int queries = 0;
    for (int i = 0; i < 10000; ++i) {
        const QueryDecision d = should_query(s, nullptr, {0.0}, {0.0}, q, c);
        if (d.query) {
            CHECK(d.fired_rule == FiredRule::Random);
            ++queries;
        }
    }
    const double freq = queries / 10000.0;
    CHECK(freq >= 0.28);
    CHECK(freq <= 0.32);
}

TEST_CASE("missing lossnet is a configuration error") {
    RngStream q(1), c(2);
    for (StrategyKind k : all_strategies()) {
        if (!strategy_needs_lossnet(k)) continue;
        CHECK_THROWS_AS(
            should_query(make_strategy(k), nullptr, {0.0, 0.0}, {0.0}, q, c), ConfigError);
    }
    // Wrong variant pairing is rejected too.
    const LossNet reg = linear_lossnet(1.0);
    CHECK_THROWS_AS(should_query(make_strategy(StrategyKind::SafeDAgger), &reg,
                                 {0.0, 0.0}, {0.0}, q, c),
                    ConfigError);
}

TEST_CASE("should_query computes signals from the lossnet") {
    const LossNet ln = linear_lossnet(1.0);  // l-hat = |s0|, grad norm = 1 off the kink
    RngStream q(1), c(2);

    Strategy loss = make_strategy(StrategyKind::Loss, 0.5);
    QueryDecision d = should_query(loss, &ln, {0.7, 0.0}, {0.0}, q, c);
    CHECK(d.query);
    CHECK(d.fired_rule == FiredRule::Threshold);
    CHECK(*d.l_hat == doctest::Approx(0.7));

    d = should_query(loss, &ln, {0.1, 0.0}, {0.0}, q, c);
    CHECK_FALSE(d.query);

    Strategy lg = make_strategy(StrategyKind::LossGradient, 0.5, 0.5);
    d = should_query(lg, &ln, {0.1, 0.0}, {0.0}, q, c);
    CHECK(d.query);  // grad norm 1 > eps 0.5
    CHECK(d.fired_rule == FiredRule::Gradient);
    CHECK(*d.grad_norm == doctest::Approx(1.0));

    lg.epsilon = 2.0;
    d = should_query(lg, &ln, {0.1, 0.0}, {0.0}, q, c);
    CHECK_FALSE(d.query);
    CHECK(d.grad_norm.has_value());  // consulted but under threshold
}

TEST_CASE("gating dominance: gradient variant queries whenever its base does") {
    RngStream sig(31);
    for (int i = 0; i < 2000; ++i) {
        const double l_hat = sig.uniform(0.0, 0.05);
        const double grad = sig.uniform(0.0, 0.01);
        const Strategy base = make_strategy(StrategyKind::Loss);
        const Strategy grad_variant = make_strategy(StrategyKind::LossGradient);
        const bool base_queries = decide_from_signals(base, l_hat, std::nullopt).query;
        const bool grad_queries = decide_from_signals(grad_variant, l_hat, grad).query;
        if (base_queries) REQUIRE(grad_queries);
    }
}

TEST_CASE("threshold monotonicity: raising tau never turns non-query into query") {
    RngStream sig(32);
    for (int i = 0; i < 2000; ++i) {
        const double l_hat = sig.uniform(0.0, 0.05);
        const double grad = sig.uniform(0.0, 0.01);
        Strategy lo = make_strategy(StrategyKind::LossGradient, 0.01, 0.004);
        Strategy hi = lo;
        hi.tau = 0.03;
        const bool q_lo = decide_from_signals(lo, l_hat, grad).query;
        const bool q_hi = decide_from_signals(hi, l_hat, grad).query;
        if (!q_lo) REQUIRE(!q_hi);
    }
}

TEST_CASE("hybrids: forced coin reproduces the pure strategies") {
    const LossNet ln = linear_lossnet(1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const Vec obs = {trial * 0.001, 0.0};
        const Vec act = {0.0};

        // Heads: identical to the pure gradient strategy.
        Strategy heads = make_strategy(StrategyKind::LossGradientRandom, 0.2, 2.0);
        heads.hybrid_coin = 1.0;
        Strategy pure_grad = make_strategy(StrategyKind::LossGradient, 0.2, 2.0);
        RngStream q1(mix_seed(1, trial)), c1(mix_seed(2, trial));
        RngStream q2(mix_seed(1, trial)), c2(mix_seed(3, trial));
        CHECK(should_query(heads, &ln, obs, act, q1, c1) ==
              should_query(pure_grad, &ln, obs, act, q2, c2));

        // Tails: identical to the pure random strategy (same query stream).
        Strategy tails = make_strategy(StrategyKind::LossGradientRandom, 0.2, 2.0);
        tails.hybrid_coin = 0.0;
        Strategy pure_random = make_strategy(StrategyKind::Random);
        tails.p_query = pure_random.p_query = 0.3;
        RngStream q3(mix_seed(4, trial)), c3(mix_seed(5, trial));
        RngStream q4(mix_seed(4, trial)), c4(mix_seed(6, trial));
        CHECK(should_query(tails, &ln, obs, act, q3, c3) ==
              should_query(pure_random, &ln, obs, act, q4, c4));
    }
}

TEST_CASE("decisions are replayable from identical rng states") {
    const LossNet ln = linear_lossnet(1.0);
    Strategy s = make_strategy(StrategyKind::LossGradientRandom, 0.3, 0.5);
    RngStream q1(7), c1(8), q2(7), c2(8);
    for (int i = 0; i < 200; ++i) {
        const Vec obs = {i * 0.01 - 1.0, 0.5};
        const QueryDecision a = should_query(s, &ln, obs, {0.2}, q1, c1);
        const QueryDecision b = should_query(s, &ln, obs, {0.2}, q2, c2);
        REQUIRE(a == b);
    }
}

TEST_CASE("execute_choice honours the verdict") {
    const Vec proposed = {0.1, 0.2};
    const Vec expert = {-0.5, 0.9};
    QueryDecision yes;
    yes.query = true;
    yes.fired_rule = FiredRule::Always;
    CHECK(execute_choice(yes, proposed, expert) == expert);

    QueryDecision no;
    CHECK(execute_choice(no, proposed, std::nullopt) == proposed);
    CHECK(execute_choice(no, proposed, expert) == proposed);

    CHECK_THROWS_AS(execute_choice(yes, proposed, std::nullopt), ContractError);
}

TEST_CASE("a full dagger episode executes only expert actions") {
    auto env = make_env("reach2d");
    auto twin = make_env("reach2d");
    RngStream r1(12), r2(12), q(1), c(2);
    Vec obs = env->reset(r1);
    twin->reset(r2);
    const Strategy dagger = make_strategy(StrategyKind::DAgger);
    while (!env->done()) {
        const Vec proposed = {0.123, -0.456};  // whatever the agent would say
        const QueryDecision d = should_query(dagger, nullptr, obs, proposed, q, c);
        const Vec expert = env->expert_action();
        const Vec chosen = execute_choice(d, proposed, expert);
        CHECK(chosen == twin->expert_action());
        obs = env->step(chosen).observation;
        twin->step(chosen);
    }
}
