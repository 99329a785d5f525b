#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bondpool/ratemath.hpp"
#include "oracle.hpp"

using namespace bondpool;

TEST_CASE("simple_to_continuous") {
    CHECK(simple_to_continuous(0.025978).value() ==
          doctest::Approx(0.025646304023557501).epsilon(1e-12));
    CHECK(simple_to_continuous(0.0).value() == 0.0);
    CHECK(simple_to_continuous(std::exp(1.0) - 1.0).value() ==
          doctest::Approx(1.0).epsilon(1e-14));

    CHECK_FALSE(simple_to_continuous(-1.0).ok());
    CHECK_FALSE(simple_to_continuous(-1.5).ok());
    CHECK(simple_to_continuous(-1.0).error().code == Errc::domain);
}

TEST_CASE("annualized_rate") {
    // Two-year bond, face 100 at price 95: about 2.56% continuous.
    CHECK(annualized_rate(100.0, 95.0, 2.0).value() ==
          doctest::Approx(0.025646647193775267).epsilon(1e-12));
    CHECK(annualized_rate(1.0, 1.0, 5.0).value() == 0.0);
    CHECK(annualized_rate(100.0, 90.4837, 1.0).value() ==
          doctest::Approx(0.10000046200129195).epsilon(1e-12));

    CHECK(annualized_rate(100.0, 95.0, 0.0).error().code == Errc::no_solution);
    CHECK(annualized_rate(-1.0, 95.0, 1.0).error().code == Errc::domain);
    CHECK(annualized_rate(100.0, 0.0, 1.0).error().code == Errc::domain);
}

TEST_CASE("discount") {
    CHECK(discount(0.1234, 0.0) == 1.0);
    CHECK(discount(0.0, 7.5) == 1.0);
    CHECK(discount(0.05, 1.0) == doctest::Approx(0.95122942450071401).epsilon(1e-14));
}

TEST_CASE("round trip discount <-> annualized_rate") {
    oracle::Fuzz fuzz(20240501);
    for (int i = 0; i < 10000; ++i) {
        const double r = fuzz.uniform(-0.5, 0.5);
        const double t = fuzz.uniform(1e-6, 30.0);
        const double back = annualized_rate(1.0, discount(r, t), t).value();
        CHECK(std::abs(back - r) <= 1e-12);
    }
}

TEST_CASE("discount monotonicity") {
    oracle::Fuzz fuzz(20240502);
    for (int i = 0; i < 2000; ++i) {
        const double r = fuzz.uniform(1e-4, 0.5);
        const double t = fuzz.uniform(1e-3, 30.0);
        const double bump_t = fuzz.uniform(1e-3, 1.0);
        const double bump_r = fuzz.uniform(1e-4, 0.1);
        CHECK(discount(r, t + bump_t) < discount(r, t));
        CHECK(discount(r + bump_r, t) < discount(r, t));
    }
}

TEST_CASE("continuous rate stays below the simple rate") {
    oracle::Fuzz fuzz(20240503);
    for (int i = 0; i < 2000; ++i) {
        const double simple = fuzz.log_uniform(1e-6, 10.0);
        CHECK(simple_to_continuous(simple).value() < simple);
    }
}
