#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bondpool/market.hpp"

using namespace bondpool;

TEST_CASE("gaussian stream determinism and moments") {
    GaussianStream a(12345, kStreamTradeSampling);
    GaussianStream b(12345, kStreamTradeSampling);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());

    GaussianStream other(12345, kStreamMarketPath);
    bool any_different = false;
    GaussianStream a2(12345, kStreamTradeSampling);
    for (int i = 0; i < 32; ++i) {
        if (a2.next() != other.next()) any_different = true;
    }
    CHECK(any_different);

    GaussianStream g(987654321, kStreamMarketPath);
    double sum = 0.0, sumsq = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double z = g.next();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.005);
    CHECK(var > 0.99);
    CHECK(var < 1.01);
}

TEST_CASE("cir path validation") {
    CHECK_FALSE(generate_market_path({0.0, 0.05, 0.2, 0.05}, 10, 0.01, 1).ok());
    CHECK_FALSE(generate_market_path({0.4, 0.05, 0.2, 0.05}, 0, 0.01, 1).ok());
    CHECK_FALSE(generate_market_path({0.4, 0.05, 0.2, 0.05}, 10, 0.0, 1).ok());
}

TEST_CASE("cir deterministic limit") {
    SUBCASE("starting on the mean stays on the mean") {
        auto path = generate_market_path({0.4, 0.05, 0.0, 0.05}, 1000, 1e-3, 9).value();
        for (double r : path.rates) CHECK(r == doctest::Approx(0.05).epsilon(1e-14));
    }
    SUBCASE("drift follows the exponential relaxation") {
        const double dt = 1e-3;
        auto path = generate_market_path({0.4, 0.05, 0.0, 0.10}, 1000, dt, 9).value();
        // Euler tracks theta + (r0-theta) e^{-kt} to first order in dt.
        for (int n = 0; n <= 1000; n += 100) {
            const double exact = 0.05 + 0.05 * std::exp(-0.4 * n * dt);
            CHECK(std::abs(path.rates[static_cast<std::size_t>(n)] - exact) < 1e-4);
        }
        // Frozen endpoint of the Euler recursion itself.
        CHECK(path.rates[1000] ==
              doctest::Approx(0.083513320413680773).epsilon(1e-12));
        // Monotone decay toward the long-run mean.
        for (int n = 1; n <= 1000; ++n) {
            CHECK(path.rates[static_cast<std::size_t>(n)] <
                  path.rates[static_cast<std::size_t>(n) - 1]);
            CHECK(path.rates[static_cast<std::size_t>(n)] >= 0.05);
        }
    }
}

TEST_CASE("cir paths are reproducible and nonnegative") {
    const CirParams params{0.4, 0.05, 0.2, 0.05};
    auto a = generate_market_path(params, 100000, 1e-5, 42).value();
    auto b = generate_market_path(params, 100000, 1e-5, 42).value();
    CHECK(a.rates == b.rates);

    for (std::uint64_t seed : {1ull, 7ull, 42ull, 1234567ull}) {
        auto path = generate_market_path(params, 20000, 5e-5, seed).value();
        double mean = 0.0;
        for (double r : path.rates) {
            CHECK(r >= 0.0);
            mean += r;
        }
        mean /= static_cast<double>(path.rates.size());
        CHECK(mean > 0.0);
    }

    // Over a full-scale grid the sample mean sits near the stationary mean.
    double mean = 0.0;
    for (double r : a.rates) mean += r;
    mean /= static_cast<double>(a.rates.size());
    CHECK(mean > 0.02);
    CHECK(mean < 0.09);
}

TEST_CASE("market csv export") {
    auto path = generate_market_path({0.4, 0.05, 0.2, 0.05}, 5, 0.25, 3).value();
    const char* file = "market_test.csv";
    REQUIRE(write_market_csv(file, path).ok());
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,time_years,rate");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 6);
    std::remove(file);
}
