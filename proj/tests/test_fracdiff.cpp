#include <catch2/catch_amalgamated.hpp>

#include "fracuc/fracdiff.hpp"
#include "testutil.hpp"

using fracuc::Series;
using fracuc::fracdiff;
using fracuc::fracint;
using fracuc::impulse_response;
using fracuc::pi_coeffs;

TEST_CASE("differencing weights follow the recursion") {
    const auto c = pi_coeffs(0.5, 2);
    REQUIRE(c.coeffs[0] == 1.0);
    REQUIRE(c.coeffs[1] == Catch::Approx(-0.5));
    REQUIRE(c.coeffs[2] == Catch::Approx(-0.125));

    // unweighted cumulation: every weight of (1-L)^{-1} equals one
    const auto ones = pi_coeffs(-1.0, 5);
    for (double v : ones.coeffs) REQUIRE(v == 1.0);

    for (double d : {-1.7, -0.3, 0.4, 1.9}) {
        REQUIRE(pi_coeffs(d, 1).coeffs[1] == Catch::Approx(-d));
    }

    REQUIRE_THROWS_AS(pi_coeffs(std::nan(""), 3), std::invalid_argument);
}

TEST_CASE("weights match the gamma-function closed form") {
    for (double d = -2.0; d <= 2.5 + 1e-9; d += 0.25) {
        if (std::abs(d - std::round(d)) < 1e-12 && d >= 0.0) continue;  // Gamma pole at -d
        const auto c = pi_coeffs(d, 1000);
        const std::size_t lags[] = {1, 2, 7, 50, 300, 1000};
        for (std::size_t j : lags) {
            const double oracle = testutil::pi_gamma_oracle(d, j);
            if (!std::isfinite(oracle)) continue;
            REQUIRE(c.coeffs[j] == Catch::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("weights decay like j^{-d-1}") {
    for (double d : {0.3, 0.7, 1.2}) {
        const auto c = pi_coeffs(d, 1000).coeffs;
        const double scale = std::abs(c[100]) * std::pow(100.0, d + 1.0);
        for (std::size_t j = 100; j <= 1000; ++j) {
            REQUIRE(std::abs(c[j]) <= 1.05 * scale * std::pow(static_cast<double>(j), -d - 1.0));
        }
    }
}

TEST_CASE("fractional difference basics") {
    const Series y({5.0, 7.0, 7.0});
    const auto d0 = fracdiff(y, 0.0);
    for (std::size_t t = 0; t < y.size(); ++t) REQUIRE(d0.values[t] == y.values[t]);

    const auto d1 = fracdiff(y, 1.0);
    REQUIRE(d1.values[0] == Catch::Approx(5.0));
    REQUIRE(d1.values[1] == Catch::Approx(2.0));
    REQUIRE(d1.values[2] == Catch::Approx(0.0));

    const auto dh = fracdiff(Series({1.0, 1.0, 1.0}), 0.5);
    REQUIRE(dh.values[0] == Catch::Approx(1.0));
    REQUIRE(dh.values[1] == Catch::Approx(0.5));
    REQUIRE(dh.values[2] == Catch::Approx(0.375));
}

TEST_CASE("fractional integration basics") {
    const auto cum = fracint(Series({1.0, 0.0, 0.0}), 1.0);
    REQUIRE(cum.values == std::vector<double>{1.0, 1.0, 1.0});

    // weights of a shock that keeps 21.66% of its impact one step later
    const auto imp = fracint(Series({1.0, 0.0, 0.0, 0.0}), 0.2166);
    REQUIRE(imp.values[0] == Catch::Approx(1.0));
    REQUIRE(imp.values[1] == Catch::Approx(0.2166));
    REQUIRE(imp.values[2] == Catch::Approx(testutil::pi_gamma_oracle(-0.2166, 2)).epsilon(1e-10));
    REQUIRE(imp.values[3] == Catch::Approx(testutil::pi_gamma_oracle(-0.2166, 3)).epsilon(1e-10));
    REQUIRE(imp.values[2] == Catch::Approx(0.13176).margin(5e-6));
    REQUIRE(imp.values[3] == Catch::Approx(0.09735).margin(5e-6));
}

TEST_CASE("difference and integration invert each other") {
    const std::uint64_t seeds[] = {1, 2, 3};
    for (std::uint64_t seed : seeds) {
        for (double d : {0.3, 0.7, 1.4}) {
            const auto y = testutil::random_series(seed == 1 ? 500 : 50, seed);
            const auto round = fracdiff(fracint(y, d), d);
            for (std::size_t t = 0; t < y.size(); ++t)
                REQUIRE(round.values[t] == Catch::Approx(y.values[t]).margin(1e-10));
        }
    }
}

TEST_CASE("impulse responses") {
    const auto ir = impulse_response(0.2166, 7);
    REQUIRE(ir[0] == 1.0);
    REQUIRE(std::abs(ir[1] - 0.2166) < 1e-4);
    REQUIRE(std::abs(ir[2] - 0.1317) < 1e-4);
    REQUIRE(std::abs(ir[3] - 0.0973) < 1e-4);
    REQUIRE(std::abs(ir[7] - 0.0510) < 1e-4);

    const auto ones = impulse_response(1.0, 12);
    for (double v : ones) REQUIRE(v == 1.0);
}
