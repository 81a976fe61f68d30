#include <vector>

#include "doctest.h"
#include "qgil/rng.hpp"
#include "qgil/sha1.hpp"

using namespace qgil;

TEST_CASE("rng streams are deterministic per seed") {
    RngStream a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        all_equal = all_equal && x == b.next_u64();
        any_diff = any_diff || x != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
    RngStream rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("below is within range and roughly uniform") {
    RngStream rng(11);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) {
        const auto v = rng.below(10);
        REQUIRE(v < 10);
        ++counts[v];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("mix_seed separates tags") {
    CHECK(mix_seed(1, 2) != mix_seed(1, 3));
    CHECK(mix_seed(1, 2) != mix_seed(2, 2));
    CHECK(mix_seed(5, 1, 2) != mix_seed(5, 2, 1));
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    std::vector<int> w = v;
    RngStream a(3), b(3);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("sha1 known vectors") {
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
          "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
    // Empty git blob.
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}
