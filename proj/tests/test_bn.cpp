#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fracuc/bn.hpp"
#include "fracuc/lagpoly.hpp"
#include "testutil.hpp"

using fracuc::LagPolynomial;
using fracuc::Series;
using fracuc::ShockCov;
using fracuc::aggregate_theta_u;
using fracuc::bn_decompose;
using fracuc::derive_reduced_innovations;
using fracuc::fracdiff;
using fracuc::fracint;

namespace {

// Lag-0 autocovariance of an MA in the lag-operator algebra, by direct
// coefficient-product sums.
double ma_lag0(const std::vector<double>& theta, double sigma2) {
    double s = 0.0;
    for (double c : theta) s += c * c;
    return s * sigma2;
}

}  // namespace

TEST_CASE("shock aggregation") {
    SECTION("pure trend: cycle weights vanish") {
        const auto agg = aggregate_theta_u({1.0, -0.4, 0.1}, ShockCov{2.5, 0.0, 0.0});
        REQUIRE(agg.sigma_u2 == Catch::Approx(2.5));
        REQUIRE(agg.theta_u[0] == 1.0);
        REQUIRE(agg.theta_u[1] == 0.0);
        REQUIRE(agg.theta_u[2] == 0.0);
    }

    SECTION("unit shocks with a single cycle lag") {
        const auto agg = aggregate_theta_u({1.0, -1.0}, ShockCov{1.0, 1.0, 0.0});
        REQUIRE(agg.sigma_u2 == Catch::Approx(2.0));
        REQUIRE(agg.theta_u[1] == Catch::Approx(-1.0 / std::sqrt(2.0)));
    }

    SECTION("lag-0 autocovariance matches for any shock covariance") {
        const ShockCov qs[] = {{1.0, 1.0, 0.0}, {0.5, 2.0, 0.4}, {3.0, 0.2, -0.6}, {1.0, 4.0, 1.9}};
        const std::vector<double> theta_eps{1.0, -0.7, 0.21, -0.063};
        for (const auto& q : qs) {
            const auto agg = aggregate_theta_u(theta_eps, q);
            // target: Var(eta + theta_eps(L_d) eps) with the contemporaneous
            // cross term entering through theta_eps[0] = 1
            double target = q.var_eta + 2.0 * q.cov;
            for (double c : theta_eps) target += c * c * q.var_eps;
            REQUIRE(ma_lag0(agg.theta_u, agg.sigma_u2) == Catch::Approx(target).epsilon(1e-12));
        }
    }

    SECTION("degenerate aggregate variance is rejected") {
        REQUIRE_THROWS_AS(aggregate_theta_u({1.0}, ShockCov{1.0, 1.0, -1.0}),
                          std::domain_error);
        REQUIRE_THROWS_AS(aggregate_theta_u({0.5}, ShockCov{1.0, 1.0, 0.0}),
                          std::invalid_argument);
    }
}

TEST_CASE("trend-cycle split") {
    SECTION("unit coefficient sum reduces to fractional integration") {
        const auto u = testutil::random_series(40, 3);
        auto y = testutil::random_series(40, 4);
        const auto bn = bn_decompose(y, 0.8, {1.0}, 1.0, u);
        const auto direct = fracint(u, 0.8);
        for (std::size_t t = 0; t < y.size(); ++t) {
            REQUIRE(bn.trend.values[t] == Catch::Approx(direct.values[t]));
            REQUIRE(bn.cycle.values[t] == Catch::Approx(y.values[t] - direct.values[t]));
        }
    }

    SECTION("white-noise cycle model recovers the simulated trend") {
        // simulate trend + white cycle, aggregate the true reduced form, and
        // feed the component-implied innovations u = eta / theta_u(1)
        const double d = 1.25;
        std::mt19937_64 rng(99);
        std::normal_distribution<double> g(0.0, 1.0);
        const std::size_t n = 200;
        Series eta, eps;
        eta.values.resize(n);
        eps.values.resize(n);
        for (auto& v : eta.values) v = g(rng);
        for (auto& v : eps.values) v = g(rng);

        const Series x = fracint(eta, d);
        Series y = x;
        for (std::size_t t = 0; t < n; ++t) y.values[t] += eps.values[t];

        const auto theta_eps = fracuc::lagpoly_invert(LagPolynomial{}, d, 4);
        const auto agg = aggregate_theta_u(theta_eps, ShockCov{1.0, 1.0, 0.0});
        double theta1 = 0.0;
        for (double c : agg.theta_u) theta1 += c;

        Series u = eta;
        for (double& v : u.values) v /= theta1;

        const auto bn = bn_decompose(y, d, agg.theta_u, agg.sigma_u2, u);
        for (std::size_t t = 0; t < n; ++t) {
            REQUIRE(bn.trend.values[t] == Catch::Approx(x.values[t]).margin(1e-10));
            REQUIRE(bn.trend.values[t] + bn.cycle.values[t] ==
                    Catch::Approx(y.values[t]).margin(1e-8));
        }
    }

    SECTION("length mismatch is rejected") {
        REQUIRE_THROWS_AS(bn_decompose(Series({1.0, 2.0}), 1.0, {1.0}, 1.0, Series({1.0})),
                          std::invalid_argument);
    }
}

TEST_CASE("reduced-form innovations invert the aggregated polynomial") {
    const double d = 1.1;
    const LagPolynomial phi({0.5});
    const auto theta_eps = fracuc::lagpoly_invert(phi, d, 400);
    const auto agg = aggregate_theta_u(fracuc::truncate_ma(theta_eps), ShockCov{1.0, 0.5, 0.0});

    // build y so that (1-L)^d_+ y = theta_u(L_d) u for a known u
    const auto u = testutil::random_series(60, 21);
    const auto pi = fracuc::pi_coeffs(d, u.size() - 1);
    std::vector<double> z = u.values;
    std::vector<double> power = u.values;
    for (std::size_t j = 1; j < agg.theta_u.size() && j < u.size(); ++j) {
        std::vector<double> next(u.size(), 0.0);
        for (std::size_t t = 0; t < u.size(); ++t) {
            double acc = 0.0;
            for (std::size_t k = 1; k <= t; ++k) acc -= pi.coeffs[k] * power[t - k];
            next[t] = acc;
        }
        power = next;
        for (std::size_t t = 0; t < u.size(); ++t) z[t] += agg.theta_u[j] * power[t];
    }
    const Series y = fracint(Series(std::move(z)), d);

    const auto back = derive_reduced_innovations(y, d, agg.theta_u);
    for (std::size_t t = 0; t < u.size(); ++t)
        REQUIRE(back.values[t] == Catch::Approx(u.values[t]).margin(1e-8));
}
