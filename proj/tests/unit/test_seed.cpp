#include <algorithm>
#include <set>

#include "doctest.h"
#include "labelsim/sampling.hpp"
#include "labelsim/seed.hpp"
#include "labelsim/synthetic.hpp"

using namespace labelsim;

TEST_CASE("derive_seed is deterministic and separates streams") {
    const auto a = derive_seed(42, {1, 0, 0});
    const auto b = derive_seed(42, {1, 0, 0});
    const auto c = derive_seed(42, {1, 0, 1});
    CHECK(a == b);
    CHECK(a.value() == b.value());
    CHECK_FALSE(a == c);
    CHECK(a.value() != c.value());

    Rng ra(a), rc(c);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += ra.next() == rc.next();
    CHECK(same == 0);
}

TEST_CASE("child extends the stream") {
    const auto s = derive_seed(7, {3});
    CHECK(s.child(9) == derive_seed(7, {3, 9}));
    CHECK(s.child(9).value() == derive_seed(7, {3, 9}).value());
    // Position matters: (1, 2) and (2, 1) are different streams.
    CHECK(derive_seed(7, {1, 2}).value() != derive_seed(7, {2, 1}).value());
    // A trailing zero is still a new stream.
    CHECK(derive_seed(7, {}).value() != derive_seed(7, {0}).value());
}

TEST_CASE("different masters draw different subsets from the same stream") {
    const auto ds = make_synthetic({50, 3, 2, 1.0}, derive_seed(1, {}));
    const auto s0 = sample_balanced_subset(ds, 0.2, derive_seed(0, {2}));
    const auto s1 = sample_balanced_subset(ds, 0.2, derive_seed(1, {2}));
    CHECK(s0.size() == 20);
    CHECK(s1.size() == 20);
    CHECK(s0.ids() != s1.ids());
}

TEST_CASE("Rng bounded draws stay in range and cover it") {
    Rng rng(derive_seed(5, {}));
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.below(7);
        REQUIRE(v < 7);
        ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal draws have roughly unit moments") {
    Rng rng(derive_seed(11, {}));
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("sample_without_replacement yields distinct in-range indices") {
    Rng rng(derive_seed(3, {}));
    for (std::size_t n : {1u, 5u, 100u}) {
        for (std::size_t k = 0; k <= n; k += std::max<std::size_t>(1, n / 4)) {
            auto v = sample_without_replacement(n, k, rng);
            REQUIRE(v.size() == k);
            std::set<std::size_t> s(v.begin(), v.end());
            CHECK(s.size() == k);
            for (auto x : v) CHECK(x < n);
        }
    }
}

TEST_CASE("shuffle is a permutation") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    Rng rng(derive_seed(9, {}));
    auto w = v;
    shuffle(w, rng);
    CHECK(w != v);
    std::sort(w.begin(), w.end());
    CHECK(w == v);
}
