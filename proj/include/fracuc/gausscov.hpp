#pragma once

// Model-implied covariance structure of the fractional signal-plus-noise
// model
//   y_t = x_t + u_t,   (1-L)^d_+ x_t = eta_t,   t = 1..n,
// with Var(eta) = sigma_eta2 and Var(u) = sigma_u2, plus the one-step
// prediction engine (innovations algorithm) and a literal dense-solve
// oracle used to cross-check it.
//
// With c_k = pi_k(-d), ascending time indices give
//   Var(y_i)      = sigma_u2 + sigma_eta2 * sum_{k=0}^{i-1} c_k^2
//   Cov(y_i, y_j) = sigma_eta2 * sum_{s=1}^{min(i,j)} c_{i-s} c_{j-s},  i != j
//   Cov(x_t, y_j) = sigma_eta2 * sum_{s=1}^{min(t,j)} c_{t-s} c_{j-s}.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fracdiff.hpp"
#include "linalg.hpp"
#include "series.hpp"

namespace fracuc {

struct ThetaParams {
    double d = 1.0;
    double sigma_eta2 = 1.0;
    double sigma_u2 = 1.0;
};

constexpr double kDefaultDMax = 2.5;

// Largest horizon for which dense n x n matrices may be materialized.
constexpr std::size_t kMatrixHorizonCap = 20000;

inline void require_valid(const ThetaParams& th, double d_max = kDefaultDMax) {
    if (!(th.d > 0.0) || !(th.d <= d_max) || !std::isfinite(th.d))
        throw std::invalid_argument("theta: d must lie in (0, d_max]");
    if (!(th.sigma_eta2 > 0.0) || !std::isfinite(th.sigma_eta2))
        throw std::invalid_argument("theta: sigma_eta2 must be positive");
    if (!(th.sigma_u2 > 0.0) || !std::isfinite(th.sigma_u2))
        throw std::invalid_argument("theta: sigma_u2 must be positive");
}

inline void require_horizon(std::size_t n, const char* who) {
    if (n == 0) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
    if (n > kMatrixHorizonCap)
        throw std::length_error(std::string(who) + ": horizon exceeds the dense-matrix cap");
}

// Row-major n x n covariance of (y_1, ..., y_n).  Built one diagonal at a
// time so each entry accumulates its defining sum in ascending order.
inline std::vector<double> cov_yy(const ThetaParams& th, std::size_t n) {
    require_valid(th);
    require_horizon(n, "cov_yy");
    const auto c = pi_coeffs(-th.d, n - 1).coeffs;
    std::vector<double> k(n * n);
    for (std::size_t h = 0; h < n; ++h) {
        double s = 0.0;
        for (std::size_t i = 0; i + h < n; ++i) {
            s += c[i] * c[i + h];
            const double value = th.sigma_eta2 * s + (h == 0 ? th.sigma_u2 : 0.0);
            k[i * n + (i + h)] = value;
            k[(i + h) * n + i] = value;
        }
    }
    return k;
}

// Cov(x_t, y_j) for j = 1..n at a fixed 1-based t.
inline std::vector<double> cov_xy(const ThetaParams& th, std::size_t t, std::size_t n) {
    require_valid(th);
    require_horizon(n, "cov_xy");
    if (t < 1 || t > n) throw std::out_of_range("cov_xy: t out of range");
    const auto c = pi_coeffs(-th.d, n - 1).coeffs;
    std::vector<double> out(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t m = std::min(t, j);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += c[i + t - m] * c[i + j - m];
        out[j - 1] = th.sigma_eta2 * s;
    }
    return out;
}

struct InnovationsOutput {
    Series yhat;  // yhat[t] = E(y_{t+1} | F_t) shifted so entry t is E(y_t | F_{t-1}), yhat[1] = 0
    Series v;     // prediction errors y_t - yhat_t
    Series mse;   // Var(v_t)
    double ahead = 0.0;  // E(y_{n+1} | F_n)
};

namespace detail {

// Innovations recursion on the model kernel.  Computes the coefficient
// triangle a[t][j] (the weight of innovation j+1 in the predictor of
// y_{t+1}), prediction-error variances, and one-step predictions through
// E(y_{n+1} | F_n).
inline InnovationsOutput innovations_engine(const ThetaParams& th,
                                            const std::vector<double>& y) {
    const std::size_t n = y.size();
    require_horizon(n, "innovations_predict");
    const std::vector<double> k = cov_yy(th, n + 1 > kMatrixHorizonCap ? n : n + 1);
    const std::size_t kn = (n + 1 > kMatrixHorizonCap) ? n : n + 1;

    std::vector<std::size_t> row(n + 1);
    for (std::size_t t = 0; t <= n; ++t) row[t] = t * (t - 1) / 2;
    std::vector<double> a(n * (n + 1) / 2);  // a[row[t] + j], j < t
    std::vector<double> vvar(n + 1);
    std::vector<double> innov(n + 1, 0.0);

    InnovationsOutput out;
    out.yhat.values.assign(n, 0.0);
    out.v.values.assign(n, 0.0);
    out.mse.values.assign(n, 0.0);

    vvar[0] = k[0];
    out.mse.values[0] = vvar[0];
    out.v.values[0] = y[0];
    innov[1] = y[0];

    const std::size_t steps = (kn == n + 1) ? n : n - 1;
    for (std::size_t t = 1; t <= steps; ++t) {
        double* at = &a[row[t]];
        for (std::size_t j = 0; j < t; ++j) {
            const double* aj = &a[row[j]];
            double s = k[t * kn + j];
            for (std::size_t i = 0; i < j; ++i) s -= aj[i] * at[i] * vvar[i];
            at[j] = s / vvar[j];
        }
        double vt = k[t * kn + t];
        double pred = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            vt -= at[j] * at[j] * vvar[j];
            pred += at[j] * innov[j + 1];
        }
        if (!(vt > 0.0) || !std::isfinite(vt))
            throw numerical_error("innovations_predict: nonpositive prediction variance at t=" +
                                  std::to_string(t + 1));
        vvar[t] = vt;
        if (t < n) {
            out.yhat.values[t] = pred;
            out.v.values[t] = y[t] - pred;
            out.mse.values[t] = vt;
            innov[t + 1] = out.v.values[t];
        } else {
            out.ahead = pred;
        }
    }
    return out;
}

}  // namespace detail

// One-step predictions, prediction errors, and their model variances.
inline InnovationsOutput innovations_predict(const ThetaParams& th, const Series& y) {
    require_valid(y, "innovations_predict");
    auto out = detail::innovations_engine(th, y.values);
    out.yhat.origin_index = y.origin_index;
    out.v.origin_index = y.origin_index;
    out.mse.origin_index = y.origin_index;
    return out;
}

// E(x_{t+1} | F_t) computed literally from the reversed-order covariance
// blocks: rows of Cov(eta_{t:1}, y_{t:1}) weighted by pi_i(-d), against a
// dense solve of Var(y_{t:1}).  O(t^3); retained as an oracle.
inline double direct_solve_oracle(const ThetaParams& th, const Series& y, std::size_t t) {
    require_valid(th);
    require_valid(y, "direct_solve_oracle");
    const std::size_t n = y.size();
    if (t < 1 || t >= n) throw std::out_of_range("direct_solve_oracle: need 1 <= t < n");

    const auto c = pi_coeffs(-th.d, t).coeffs;

    // Var(y_{t:1}) with entry (i, j), 1-based reversed order.
    std::vector<double> sig(t * t);
    for (std::size_t i = 1; i <= t; ++i) {
        for (std::size_t j = 1; j <= t; ++j) {
            double s = 0.0;
            if (i == j) {
                for (std::size_t k = 0; k <= t - i; ++k) s += c[k] * c[k];
                sig[(i - 1) * t + (j - 1)] = th.sigma_u2 + th.sigma_eta2 * s;
            } else {
                const std::size_t hi = std::max(i, j);
                const std::size_t lag = (i > j) ? i - j : j - i;
                for (std::size_t k = 0; k <= t - hi; ++k) s += c[k] * c[k + lag];
                sig[(i - 1) * t + (j - 1)] = th.sigma_eta2 * s;
            }
        }
    }

    std::vector<double> l = sig;
    if (!cholesky_factor(l, t)) {
        // jitter fallback is allowed here (oracle only)
        double trace = 0.0;
        for (std::size_t i = 0; i < t; ++i) trace += sig[i * t + i];
        const double jitter = 1e-12 * trace / static_cast<double>(t);
        l = sig;
        for (std::size_t i = 0; i < t; ++i) l[i * t + i] += jitter;
        if (!cholesky_factor(l, t))
            throw numerical_error("direct_solve_oracle: singular system");
    }

    std::vector<double> yrev(t);
    for (std::size_t i = 0; i < t; ++i) yrev[i] = y.values[t - 1 - i];
    const std::vector<double> w = cholesky_solve(l, t, yrev);

    // row i of Cov(eta_{t:1}, y_{t:1}) is pi_{i-j}(-d) sigma_eta2 for i >= j
    double pred = 0.0;
    for (std::size_t i = 1; i <= t; ++i) {
        double dot = 0.0;
        for (std::size_t j = 1; j <= i; ++j) dot += c[i - j] * th.sigma_eta2 * w[j - 1];
        pred += c[i] * dot;
    }
    return pred;
}

// ---- reduced-form identification -----------------------------------------
//
// Fractionally differencing the observation gives eta_t plus the truncated
// d-difference of the noise, whose lag-0/lag-1 autocovariances at time t are
//   g0 = sigma_eta2 + sigma_u2 * sum_{i=0}^{t-1} pi_i(d)^2
//   g1 =              sigma_u2 * sum_{i=0}^{t-2} pi_i(d) pi_{i+1}(d).
// The 2x2 map (sigma_eta2, sigma_u2) -> (g0, g1) is triangular with
// determinant sum pi_i pi_{i+1}, nonzero for d > 0, so the variances are
// recoverable from the reduced form.

inline std::pair<double, double> reduced_form_autocov(const ThetaParams& th, std::size_t t) {
    require_valid(th);
    if (t < 2) throw std::invalid_argument("reduced_form_autocov: t must be >= 2");
    const auto pi = pi_coeffs(th.d, t - 1).coeffs;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i + 1 <= t - 1; ++i) s1 += pi[i] * pi[i + 1];
    for (std::size_t i = 0; i <= t - 1; ++i) s0 += pi[i] * pi[i];
    return {th.sigma_eta2 + th.sigma_u2 * s0, th.sigma_u2 * s1};
}

inline double identification_determinant(double d, std::size_t t) {
    if (t < 2) throw std::invalid_argument("identification_determinant: t must be >= 2");
    const auto pi = pi_coeffs(d, t - 1).coeffs;
    double s1 = 0.0;
    for (std::size_t i = 0; i + 1 <= t - 1; ++i) s1 += pi[i] * pi[i + 1];
    return s1;
}

inline std::pair<double, double> identify_variances(double d, std::size_t t,
                                                    double g0, double g1) {
    const auto pi = pi_coeffs(d, t - 1).coeffs;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i + 1 <= t - 1; ++i) s1 += pi[i] * pi[i + 1];
    for (std::size_t i = 0; i <= t - 1; ++i) s0 += pi[i] * pi[i];
    if (s1 == 0.0) throw numerical_error("identify_variances: singular identification system");
    const double sigma_u2 = g1 / s1;
    const double sigma_eta2 = g0 - sigma_u2 * s0;
    return {sigma_eta2, sigma_u2};
}

}  // namespace fracuc
