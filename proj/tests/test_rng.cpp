#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dsde/rng.hpp"

using namespace dsde;

TEST_CASE("streams are reproducible and distinct") {
    Rng a(42, 0), b(42, 0), c(42, 1);
    bool all_equal = true, any_equal_to_other_stream = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_equal_to_other_stream = any_equal_to_other_stream || (va == c.next_u64());
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_to_other_stream);
}

TEST_CASE("uniform stays in [0,1) and has the right mean") {
    Rng rng(1, 0);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    CHECK(acc / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal moments") {
    Rng rng(5, 3);
    const int n = 400000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    CHECK(s1 / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("below covers the range") {
    Rng rng(9, 0);
    std::uint64_t seen = 0;
    for (int i = 0; i < 1000; ++i) seen |= 1ULL << rng.below(8);
    CHECK(seen == 0xFF);
}
