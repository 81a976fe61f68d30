#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "qgil/aggregation.hpp"
#include "qgil/dataset.hpp"

using namespace qgil;

namespace {

Dataset tiny_dataset(std::size_t n, std::uint64_t split_seed = 7) {
    Dataset d;
    d.state_dim = 2;
    d.action_dim = 1;
    d.split_seed = split_seed;
    for (std::size_t i = 0; i < n; ++i) {
        aggregate(d, DemoRecord{{double(i), -double(i)},
                                {0.5 * double(i)},
                                {0.25 * double(i)},
                                int(i / 10),
                                i % 3 == 0 ? RecordSource::Bootstrap : RecordSource::Queried});
    }
    return d;
}

}  // namespace

TEST_CASE("bootstrap: one reach2d episode yields 50 bootstrap records") {
    auto env = make_env("reach2d");
    RngStream rng(5);
    const Dataset d = bootstrap(*env, 1, rng, 99);
    REQUIRE(d.size() == 50);
    for (const DemoRecord& r : d.records) {
        CHECK(r.source == RecordSource::Bootstrap);
        CHECK(r.proposed_action == r.expert_action);
        CHECK(r.iteration == 0);
    }
    CHECK(count_queries(d) == 50);
}

TEST_CASE("bootstrap: identical seeds give identical datasets") {
    auto env = make_env("cliffcorridor");
    RngStream r1(8), r2(8);
    const Dataset a = bootstrap(*env, 2, r1, 1);
    const Dataset b = bootstrap(*env, 2, r2, 1);
    CHECK(a == b);
    CHECK(a.size() == 400);
}

TEST_CASE("bootstrap: record cap stops collection") {
    auto env = make_env("reach2d");
    RngStream rng(5);
    const Dataset d = bootstrap(*env, 5, rng, 99, 120);
    CHECK(d.size() == 120);
}

TEST_CASE("aggregate: grows by one, preserves order, keeps duplicates") {
    Dataset d = tiny_dataset(3);
    const DemoRecord r = d.records[0];
    aggregate(d, r);
    aggregate(d, r);
    REQUIRE(d.size() == 5);
    CHECK(d.records[3] == r);
    CHECK(d.records[4] == r);
    CHECK(d.records[0] == r);  // prior records untouched

    DemoRecord bad = r;
    bad.state = {1.0};
    CHECK_THROWS_AS(aggregate(d, bad), ShapeError);
}

TEST_CASE("split: 80/20 counts and rounding") {
    CHECK(split(tiny_dataset(100), 0.2, 1).val.size() == 20);
    CHECK(split(tiny_dataset(100), 0.2, 1).train.size() == 80);
    CHECK(split(tiny_dataset(5), 0.2, 1).val.size() == 1);
    CHECK(split(tiny_dataset(5), 0.2, 1).train.size() == 4);
    CHECK(split(tiny_dataset(10), 0.2, 1).val.size() == 2);
    CHECK(split(tiny_dataset(1001), 0.2, 1).val.size() == 200);
    CHECK(split(tiny_dataset(3), 0.2, 1).val.size() == 1);
    const SplitIndices tiny = split(tiny_dataset(2), 0.2, 1);
    CHECK(tiny.val.empty());
    CHECK(tiny.degenerate_val);
}

TEST_CASE("split: deterministic partition for every size") {
    for (std::size_t n : {5ul, 10ul, 100ul, 1001ul}) {
        const Dataset d = tiny_dataset(n);
        const SplitIndices a = split(d, 0.2, 42);
        const SplitIndices b = split(d, 0.2, 42);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);

        std::set<std::size_t> seen;
        for (std::size_t i : a.train) seen.insert(i);
        for (std::size_t i : a.val) seen.insert(i);
        CHECK(seen.size() == n);               // disjoint and exhaustive
        CHECK(*seen.rbegin() == n - 1);

        const SplitIndices c = split(d, 0.2, 43);
        CHECK(a.val != c.val);  // different seed, different partition
    }
}

TEST_CASE("dataset text round-trip is exact") {
    auto env = make_env("reach2d");
    RngStream rng(17);
    Dataset d = bootstrap(*env, 1, rng, 31415);
    aggregate(d, DemoRecord{Vec(8, 0.123456789012345678),
                            {1e-17, -3.0},
                            {0.1 + 0.2, 2.0 / 3.0},
                            4,
                            RecordSource::Queried});
    std::stringstream ss;
    save_dataset(d, ss);
    const Dataset back = load_dataset(ss);
    CHECK(back == d);
}

TEST_CASE("retrain: memorizes a single repeated pair and is bit-deterministic") {
    Dataset d;
    d.state_dim = 2;
    d.action_dim = 1;
    d.split_seed = 3;
    for (int i = 0; i < 8; ++i) {
        aggregate(d, DemoRecord{{0.3, -0.2}, {0.0}, {0.5}, 0, RecordSource::Bootstrap});
    }
    Policy arch = Policy::make(2, 1, 0.0);
    nn::TrainConfig cfg;
    cfg.learning_rate = 0.02;
    cfg.max_epochs = 300;
    cfg.patience = 299;
    const RetrainResult a = retrain(d, arch, nullptr, cfg, cfg, 77, 1);
    const RetrainResult b = retrain(d, arch, nullptr, cfg, cfg, 77, 1);
    CHECK(a.policy == b.policy);
    CHECK(a.policy_val_loss == b.policy_val_loss);
    const Vec out = propose_action(a.policy, {0.3, -0.2});
    CHECK(std::fabs(out[0] - 0.5) < 1e-3);
    CHECK(std::isfinite(a.policy_val_loss));

    const RetrainResult c = retrain(d, arch, nullptr, cfg, cfg, 77, 2);
    CHECK(!(c.policy == a.policy));  // fresh init per iteration seed
}

TEST_CASE("select_best: argmin with latest-wins ties") {
    Policy p = Policy::make(2, 1);
    std::vector<PolicySnapshot> snaps;
    snaps.push_back({p, 0.5, 1});
    snaps.push_back({p, 0.3, 2});
    snaps.push_back({p, 0.4, 3});
    CHECK(select_best(snaps).iteration == 2);

    std::vector<PolicySnapshot> single;
    single.push_back({p, 9.0, 1});
    CHECK(select_best(single).iteration == 1);

    std::vector<PolicySnapshot> tie;
    tie.push_back({p, 0.3, 1});
    tie.push_back({p, 0.3, 2});
    CHECK(select_best(tie).iteration == 2);
}
