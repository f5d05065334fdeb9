#pragma once

// User-facing filtering layer: one-step-ahead predictions of the latent
// component, prediction errors and the squared-error objective built from
// them, and full-sample smoothing.
//
// Because the measurement noise is white, E(x_{t+1} | F_t) = E(y_{t+1} | F_t),
// so the latent prediction comes straight from the innovations engine.  The
// smoother is the projection
//   x_{t|n} = Cov(x_t, y_{1:n}) Var(y_{1:n})^{-1} y_{1:n},
// evaluated with one factorization of Var(y_{1:n}) reused across t; the
// cross-covariance block equals Var(y) minus sigma_u2 on the diagonal.

#include <cmath>
#include <cstddef>
#include <vector>

#include "gausscov.hpp"
#include "series.hpp"

namespace fracuc {

struct FilterOutput {
    Series x_pred;  // entry t predicts the latent component at t+1
    Series v;       // one-step prediction errors, v[1] = y[1]
    double css = 0.0;           // mean squared prediction error
    double loglik_proxy = 0.0;  // -n/2 * log(css); proportional comparison aid only
};

struct SmoothOutput {
    Series x_smooth;
    Series residual;
};

inline FilterOutput run_filter(const ThetaParams& th, const Series& y) {
    const auto inn = innovations_predict(th, y);
    const std::size_t n = y.size();

    FilterOutput out;
    out.v = inn.v;
    out.x_pred.values.resize(n);
    out.x_pred.origin_index = y.origin_index;
    for (std::size_t i = 0; i + 1 < n; ++i) out.x_pred.values[i] = inn.yhat.values[i + 1];
    out.x_pred.values[n - 1] = inn.ahead;

    double ss = 0.0;
    for (double e : out.v.values) ss += e * e;
    out.css = ss / static_cast<double>(n);
    out.loglik_proxy = -0.5 * static_cast<double>(n) * std::log(out.css);
    return out;
}

inline SmoothOutput run_smoother(const ThetaParams& th, const Series& y) {
    require_valid(y, "run_smoother");
    const std::size_t n = y.size();
    const std::vector<double> sigma = cov_yy(th, n);
    const std::vector<double> l = cholesky_or_throw(sigma, n, "run_smoother");
    const std::vector<double> w = cholesky_solve(l, n, y.values);

    SmoothOutput out;
    out.x_smooth.values.resize(n);
    out.x_smooth.origin_index = y.origin_index;
    out.residual.values.resize(n);
    out.residual.origin_index = y.origin_index;
    for (std::size_t t = 0; t < n; ++t) {
        // Cov(x_t, y_.) is row t of Var(y) with sigma_u2 removed on the diagonal
        double acc = 0.0;
        const double* row = &sigma[t * n];
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * w[j];
        acc -= th.sigma_u2 * w[t];
        out.x_smooth.values[t] = acc;
        out.residual.values[t] = y.values[t] - acc;
    }
    return out;
}

// Mean squared error and coefficient of determination of a latent-component
// estimate against the true path.
inline std::pair<double, double> smoother_r2(const Series& x_true, const Series& x_smooth) {
    require_valid(x_true, "smoother_r2");
    require_valid(x_smooth, "smoother_r2");
    if (x_true.size() != x_smooth.size())
        throw std::invalid_argument("smoother_r2: length mismatch");
    const std::size_t n = x_true.size();
    const double xbar = mean(x_true.values);
    double ssr = 0.0, sst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = x_true.values[t] - x_smooth.values[t];
        ssr += e * e;
        const double c = x_true.values[t] - xbar;
        sst += c * c;
    }
    if (sst == 0.0)
        throw std::domain_error("smoother_r2: r2 undefined for constant x_true");
    return {ssr / static_cast<double>(n), 1.0 - ssr / sst};
}

}  // namespace fracuc
