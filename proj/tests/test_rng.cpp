#include "densehmm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <unordered_set>

using densehmm::Rng;

TEST_CASE("same seed reproduces the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(42), d(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.uniform() == d.uniform());
        CHECK(c.normal() == d.normal());
        CHECK(c.gamma(0.7) == d.gamma(0.7));
    }
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("uniform lies in [0, 1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform_int respects its bound") {
    Rng rng(9);
    bool saw_zero = false, saw_max = false;
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(7);
        CHECK(v < 7);
        if (v == 0) saw_zero = true;
        if (v == 6) saw_max = true;
    }
    CHECK(saw_zero);
    CHECK(saw_max);
}

TEST_CASE("normal moments over 1e5 draws") {
    Rng rng(5);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gamma draws are positive with mean near alpha") {
    Rng rng(11);
    for (const double alpha : {0.3, 1.0, 2.5}) {
        const int n = 100000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = rng.gamma(alpha);
            REQUIRE(x > 0.0);
            sum += x;
        }
        CHECK(std::abs(sum / n - alpha) < 0.05);
    }
}

TEST_CASE("derive_seed is collision-free over a large index range") {
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t base : {0ull, 1ull, 123456789ull}) {
        for (std::uint64_t i = 0; i < 2000; ++i) {
            CHECK(seen.insert(Rng::derive_seed(base, i)).second);
        }
    }
}

TEST_CASE("derive_seed is a pure function") {
    CHECK(Rng::derive_seed(3, 10) == Rng::derive_seed(3, 10));
    CHECK(Rng::derive_seed(3, 10) != Rng::derive_seed(3, 11));
    CHECK(Rng::derive_seed(3, 10) != Rng::derive_seed(4, 10));
}
