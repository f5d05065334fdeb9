#pragma once

// Parameter estimation for the fractional signal-plus-noise model:
//  * squared-prediction-error (CSS) fit with multistart Nelder-Mead over
//    transformed coordinates (logit-scaled d, log variances),
//  * standard errors from a central-difference Hessian,
//  * exact local Whittle pre-estimate of d,
//  * deterministic-term (mean + weekly seasonal) estimation on
//    fractionally differenced regressors.
//
// The squared-error objective fixes only d and the variance ratio: scaling
// both variances leaves every one-step predictor unchanged.  After the
// search the variance level is therefore pinned by matching the average
// standardized squared prediction error to one, which leaves the objective
// value untouched and makes the reported variances well defined.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "filter.hpp"
#include "gausscov.hpp"
#include "linalg.hpp"
#include "optim.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace fracuc {

struct EstimationConfig {
    int n_starts = 100;
    double d_start_lo = 0.5;
    double d_start_hi = 2.0;
    double d_max = kDefaultDMax;
    double tol = 1e-8;
    std::size_t max_evals = 600;  // per start, restarts included
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
};

struct FitReport {
    ThetaParams theta_hat;
    std::array<double, 3> se{std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()};
    bool se_valid = false;
    double css_value = std::numeric_limits<double>::infinity();
    int starts_tried = 0;
    bool converged = false;
    double mu_hat = 0.0;
    std::array<double, 7> alpha_hat{};
    double d_ew = std::numeric_limits<double>::quiet_NaN();
    int bandwidth_m = 0;
};

// ---- transformed coordinates ----------------------------------------------

namespace detail {

// Search coordinates: z1 = logit(d / d_max) and z2 = difference of the log
// variances.  The objective does not move along the common log-variance
// level (see the note above), so only these two coordinates are searched and
// the level is normalized afterwards.  The boxes below are the "parameter
// bounds" of the boundary-honesty convergence flag.
constexpr double kZBoundD = 16.0;
constexpr double kZBoundRatio = 16.0;
constexpr double kBoundaryMargin = 1e-3;

inline std::vector<double> theta_to_z(const ThetaParams& th, double d_max) {
    const double r = th.d / d_max;
    return {std::log(r / (1.0 - r)), std::log(th.sigma_eta2) - std::log(th.sigma_u2)};
}

inline ThetaParams z_to_theta(const std::vector<double>& z, double d_max) {
    ThetaParams th;
    th.d = d_max / (1.0 + std::exp(-z[0]));
    th.sigma_eta2 = std::exp(z[1]);
    th.sigma_u2 = 1.0;
    return th;
}

inline bool interior_z(const std::vector<double>& z) {
    return std::abs(z[0]) < kZBoundD - kBoundaryMargin &&
           std::abs(z[1]) < kZBoundRatio - kBoundaryMargin;
}

}  // namespace detail

inline double css_objective(const ThetaParams& th, const Series& y) {
    return run_filter(th, y).css;
}

struct SingleFitResult {
    ThetaParams theta;
    double css = std::numeric_limits<double>::infinity();
    bool nm_converged = false;
    bool interior = false;
    std::size_t evals = 0;
};

// One bounded Nelder-Mead run from theta_start, followed by the variance
// level normalization described above.
inline SingleFitResult css_fit_single(const Series& y, const ThetaParams& theta_start,
                                      const EstimationConfig& config) {
    require_valid(y, "css_fit_single");

    auto objective = [&](const std::vector<double>& z) -> double {
        try {
            return css_objective(detail::z_to_theta(z, config.d_max), y);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    NelderMeadOptions opt;
    opt.tol = config.tol;
    opt.max_evals = config.max_evals;
    opt.lower = {-detail::kZBoundD, -detail::kZBoundRatio};
    opt.upper = {detail::kZBoundD, detail::kZBoundRatio};

    const auto nm = nelder_mead(objective, detail::theta_to_z(theta_start, config.d_max), opt);

    SingleFitResult out;
    out.css = nm.fval;
    out.nm_converged = nm.converged;
    out.interior = detail::interior_z(nm.x);
    out.evals = nm.evals;
    out.theta = detail::z_to_theta(nm.x, config.d_max);

    if (std::isfinite(out.css)) {
        // pin the variance level: mean standardized squared prediction error = 1
        try {
            const auto inn = innovations_predict(out.theta, y);
            double c = 0.0;
            for (std::size_t t = 0; t < y.size(); ++t)
                c += inn.v.values[t] * inn.v.values[t] / inn.mse.values[t];
            c /= static_cast<double>(y.size());
            if (std::isfinite(c) && c > 0.0) {
                out.theta.sigma_eta2 *= c;
                out.theta.sigma_u2 *= c;
            }
        } catch (const std::exception&) {
            // keep the unscaled point; objective value is unaffected either way
        }
    }
    return out;
}

// Multistart CSS fit.  Starting values: d uniform on [d_start_lo, d_start_hi],
// variances uniform on [0.1, 10] times the sample variance of the first
// difference.  Starts run on independent RNG streams; the winner is the
// lowest objective with ties broken by start index, so results are
// bit-identical for a given seed regardless of thread count.
inline FitReport css_fit(const Series& y, const EstimationConfig& config) {
    require_valid(y, "css_fit");
    if (config.n_starts < 1) throw std::invalid_argument("css_fit: n_starts must be >= 1");

    Series dy = fracdiff(y, 1.0);
    const double scale = std::max(sample_variance(dy.values),  1e-12);

    const int n = config.n_starts;
    std::vector<SingleFitResult> results(n);
    std::vector<std::string> failures(n);

    auto run_start = [&](int i) {
        auto stream = make_stream(config.seed, static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> ud(config.d_start_lo, config.d_start_hi);
        std::uniform_real_distribution<double> uv(0.1, 10.0);
        ThetaParams start;
        start.d = std::min(ud(stream), config.d_max * (1.0 - 1e-9));
        start.sigma_eta2 = uv(stream) * scale;
        start.sigma_u2 = uv(stream) * scale;
        try {
            results[i] = css_fit_single(y, start, config);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    };

    unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                            : std::thread::hardware_concurrency();
    if (n_threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) run_start(i);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_start(i);
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<unsigned>(n_threads, static_cast<unsigned>(n)); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int best = -1;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(results[i].css)) continue;
        if (best < 0 || results[i].css < results[best].css) best = i;
    }
    if (best < 0) {
        std::string diag = "css_fit: all starts failed";
        for (int i = 0; i < n; ++i)
            if (!failures[i].empty())
                diag += "\n  start " + std::to_string(i) + ": " + failures[i];
        throw std::runtime_error(diag);
    }

    FitReport report;
    report.theta_hat = results[best].theta;
    report.css_value = results[best].css;
    report.starts_tried = n;
    report.converged = results[best].nm_converged && results[best].interior;
    return report;
}

// ---- standard errors -------------------------------------------------------

// Central-difference Hessian of `objective` (in original coordinates) at
// theta_hat; standard errors are the square roots of the diagonal of its
// inverse.  When the Hessian is not positive definite the diagonal of an
// eigenvalue-truncated pseudo-inverse is reported and `second` is false.
inline std::pair<std::array<double, 3>, bool> hessian_se_generic(
    const std::function<double(const ThetaParams&)>& objective, const ThetaParams& theta_hat) {
    const std::array<double, 3> x{theta_hat.d, theta_hat.sigma_eta2, theta_hat.sigma_u2};
    std::array<double, 3> h;
    for (int i = 0; i < 3; ++i) h[i] = std::max(1e-4 * std::abs(x[i]), 1e-6);

    auto f = [&](double a, double b, double c) {
        return objective(ThetaParams{a, b, c});
    };
    auto at = [&](int i, double di, int j, double dj) {
        std::array<double, 3> p = x;
        p[i] += di;
        if (j >= 0) p[j] += dj;
        return f(p[0], p[1], p[2]);
    };

    std::array<double, 3> se{std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()};
    std::vector<double> hess(9, 0.0);
    try {
        const double f0 = f(x[0], x[1], x[2]);
        for (int i = 0; i < 3; ++i) {
            const double fp = at(i, h[i], -1, 0.0);
            const double fm = at(i, -h[i], -1, 0.0);
            hess[i * 3 + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double fpp = at(i, h[i], j, h[j]);
                const double fpm = at(i, h[i], j, -h[j]);
                const double fmp = at(i, -h[i], j, h[j]);
                const double fmm = at(i, -h[i], j, -h[j]);
                const double hij = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
                hess[i * 3 + j] = hij;
                hess[j * 3 + i] = hij;
            }
        }
        for (double v : hess)
            if (!std::isfinite(v)) throw numerical_error("hessian_se: non-finite entry");
    } catch (const std::exception&) {
        return {se, false};
    }

    std::vector<double> l = hess;
    if (cholesky_factor(l, 3)) {
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> e(3, 0.0);
            e[i] = 1.0;
            const double d2 = cholesky_solve(l, 3, e)[i];
            if (d2 > 0.0 && std::isfinite(d2)) se[i] = std::sqrt(d2);
            else ok = false;
        }
        if (ok) return {se, true};
    }

    // pseudo-inverse fallback: drop eigenvalues below a relative cutoff
    std::vector<double> a = hess, v;
    jacobi_eigen(a, v, 3);
    double lmax = 0.0;
    for (int i = 0; i < 3; ++i) lmax = std::max(lmax, std::abs(a[i * 3 + i]));
    const double cutoff = 1e-10 * std::max(lmax, 1e-300);
    for (int i = 0; i < 3; ++i) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double lam = a[k * 3 + k];
            if (lam > cutoff) d2 += v[i * 3 + k] * v[i * 3 + k] / lam;
        }
        se[i] = d2 > 0.0 ? std::sqrt(d2) : std::numeric_limits<double>::quiet_NaN();
    }
    return {se, false};
}

// Hessian of (n/2) * css at theta_hat, the curvature matching the estimator's
// asymptotic covariance.
inline std::pair<std::array<double, 3>, bool> hessian_se(const Series& y_adjusted,
                                                         const ThetaParams& theta_hat) {
    const double half_n = 0.5 * static_cast<double>(y_adjusted.size());
    auto objective = [&](const ThetaParams& th) {
        require_valid(th, std::max(kDefaultDMax, th.d));  // reject nonpositive variances
        return half_n * css_objective(th, y_adjusted);
    };
    return hessian_se_generic(objective, theta_hat);
}

// ---- exact local Whittle ---------------------------------------------------

// Objective R(d) = log G(d) - 2 d (1/m) sum log lambda_j with
// G(d) the average periodogram of the d-differenced, mean-corrected series
// over the first m Fourier frequencies.  The mean correction interpolates
// between the sample mean (d <= 1/2) and the first observation (d >= 3/4)
// with a cosine weight.
inline double elw_estimate(const Series& x, std::size_t m, double d_max = kDefaultDMax) {
    require_valid(x, "elw_estimate");
    const std::size_t n = x.size();
    if (m <= 1 || 2 * m >= n)
        throw std::invalid_argument("elw_estimate: need 1 < m < n/2");

    const double two_pi = 6.283185307179586476925286766559;
    const double xbar = mean(x.values);
    const double x1 = x.values[0];

    // trig tables: basis[j][t] for the first m Fourier frequencies
    std::vector<double> cos_tab(m * n), sin_tab(m * n);
    double sum_log_lambda = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double lambda = two_pi * static_cast<double>(j) / static_cast<double>(n);
        sum_log_lambda += std::log(lambda);
        for (std::size_t t = 0; t < n; ++t) {
            const double a = lambda * static_cast<double>(t + 1);
            cos_tab[(j - 1) * n + t] = std::cos(a);
            sin_tab[(j - 1) * n + t] = std::sin(a);
        }
    }
    const double log_lambda_mean = sum_log_lambda / static_cast<double>(m);

    auto objective = [&](double d) -> double {
        double w = 1.0;
        if (d >= 0.75) w = 0.0;
        else if (d > 0.5) w = 0.5 * (1.0 + std::cos(2.0 * two_pi * d));
        const double mu = w * xbar + (1.0 - w) * x1;

        Series z;
        z.values.resize(n);
        for (std::size_t t = 0; t < n; ++t) z.values[t] = x.values[t] - mu;
        const Series zd = fracdiff(z, d);

        double g = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double* ct = &cos_tab[j * n];
            const double* st = &sin_tab[j * n];
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                re += zd.values[t] * ct[t];
                im += zd.values[t] * st[t];
            }
            g += (re * re + im * im) / (two_pi * static_cast<double>(n));
        }
        g /= static_cast<double>(m);
        if (!(g > 0.0) || !std::isfinite(g)) return std::numeric_limits<double>::infinity();
        return std::log(g) - 2.0 * d * log_lambda_mean;
    };

    // coarse grid, then golden-section refinement around the grid minimum
    double best_d = 0.01, best_r = objective(0.01);
    for (double d = 0.02; d <= d_max + 1e-12; d += 0.01) {
        const double r = objective(d);
        if (r < best_r) { best_r = r; best_d = d; }
    }
    double lo = std::max(0.01, best_d - 0.01), hi = std::min(d_max, best_d + 0.01);
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = objective(c1), f2 = objective(c2);
    for (int it = 0; it < 60 && (b - a) > 1e-7; ++it) {
        if (f1 < f2) { b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a); f1 = objective(c1); }
        else { a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a); f2 = objective(c2); }
    }
    const double refined = 0.5 * (a + b);
    return objective(refined) < best_r ? refined : best_d;
}

// ---- deterministic terms ---------------------------------------------------

namespace detail {

inline std::vector<double> ols_via_normal_equations(const std::vector<std::vector<double>>& cols,
                                                    const std::vector<double>& yv) {
    const std::size_t p = cols.size();
    const std::size_t n = yv.size();
    std::vector<double> xtx(p * p), xty(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += cols[i][t] * cols[j][t];
            xtx[i * p + j] = s;
            xtx[j * p + i] = s;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += cols[i][t] * yv[t];
        xty[i] = s;
    }
    std::vector<double> l = xtx;
    if (!cholesky_factor(l, p))
        throw numerical_error("deterministic_fit: rank-deficient design");
    return cholesky_solve(l, p, xty);
}

}  // namespace detail

struct DeterministicFit {
    double mu_hat = 0.0;
    std::array<double, 7> alpha_hat{};  // weekday coefficients, sum exactly constrained to 0
};

// Regress the d-differenced series on the d-differenced constant and six
// free centered weekly dummies (day i minus day 7); the seventh coefficient
// is implied by the zero-sum constraint.  first_weekday gives the weekday
// (0..6) of the first observation.
inline DeterministicFit deterministic_fit(const Series& logY, double d_ew,
                                          int first_weekday = 0) {
    require_valid(logY, "deterministic_fit");
    const std::size_t n = logY.size();
    if (n < 15) throw std::invalid_argument("deterministic_fit: need n >= 15");
    if (first_weekday < 0 || first_weekday > 6)
        throw std::invalid_argument("deterministic_fit: first_weekday out of range");

    std::vector<std::vector<double>> cols(7, std::vector<double>(n, 0.0));
    for (std::size_t t = 0; t < n; ++t) cols[0][t] = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const int day = static_cast<int>((first_weekday + t) % 7);
        if (day < 6) cols[day + 1][t] += 1.0;
        else
            for (int i = 1; i <= 6; ++i) cols[i][t] -= 1.0;  // s_i - s_7 columns
    }
    for (auto& c : cols) c = fracdiff(Series(std::move(c)), d_ew).values;
    const std::vector<double> resp = fracdiff(logY, d_ew).values;

    const auto beta = detail::ols_via_normal_equations(cols, resp);

    DeterministicFit out;
    out.mu_hat = beta[0];
    double acc = 0.0;
    for (int i = 0; i < 6; ++i) {
        out.alpha_hat[i] = beta[i + 1];
        acc += beta[i + 1];
    }
    out.alpha_hat[6] = -acc;
    return out;
}

// Mean estimate from the 7-term moving average with offset q, which cancels
// the weekly pattern without estimating it.
inline double seasonal_means_alt(const Series& logY, double d_ew, int q) {
    require_valid(logY, "seasonal_means_alt");
    const std::size_t n = logY.size();
    if (n < 14) throw std::invalid_argument("seasonal_means_alt: need n >= 14");
    if (q < 0 || q > 6) throw std::invalid_argument("seasonal_means_alt: q must lie in [0, 6]");

    // ma_t = (1/7) sum_{i=0}^{6} logY_{t-q+i}; valid t's form a contiguous block
    std::vector<double> ma;
    ma.reserve(n - 6);
    for (std::size_t t = 0; t + 6 < n; ++t) {
        double s = 0.0;
        for (int i = 0; i < 7; ++i) s += logY.values[t + static_cast<std::size_t>(i)];
        ma.push_back(s / 7.0);
    }
    const std::vector<double> y = fracdiff(Series(std::move(ma)), d_ew).values;
    std::vector<double> ones(y.size(), 1.0);
    const std::vector<double> x = fracdiff(Series(std::move(ones)), d_ew).values;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        sxy += x[t] * y[t];
        sxx += x[t] * x[t];
    }
    if (sxx == 0.0) throw numerical_error("seasonal_means_alt: degenerate regressor");
    return sxy / sxx;
}

// Remove mean and weekly pattern: y_t = logY_t - mu - alpha_{weekday(t)}.
inline Series adjust(const Series& logY, double mu, const std::array<double, 7>& alpha,
                     int first_weekday) {
    require_valid(logY, "adjust");
    if (first_weekday < 0 || first_weekday > 6)
        throw config_error("adjust: first weekday unknown or out of range");
    Series out = logY;
    for (std::size_t t = 0; t < out.size(); ++t)
        out.values[t] -= mu + alpha[(first_weekday + t) % 7];
    return out;
}

// ---- full pipeline ---------------------------------------------------------

struct FullFit {
    FitReport report;
    Series y_adjusted;
};

inline int default_bandwidth(std::size_t n, double exponent = 0.65) {
    return static_cast<int>(std::floor(std::pow(static_cast<double>(n), exponent)));
}

// Local Whittle pre-estimate, deterministic adjustment, then the CSS fit
// with standard errors.
inline FullFit fit_full(const Series& logY, int first_weekday, const EstimationConfig& config,
                        double bandwidth_exponent = 0.65, bool with_se = true) {
    FullFit out;
    const int m = default_bandwidth(logY.size(), bandwidth_exponent);
    out.report.bandwidth_m = m;
    out.report.d_ew = elw_estimate(logY, static_cast<std::size_t>(m), config.d_max);
    const auto det = deterministic_fit(logY, out.report.d_ew, first_weekday);
    out.report.mu_hat = det.mu_hat;
    out.report.alpha_hat = det.alpha_hat;
    out.y_adjusted = adjust(logY, det.mu_hat, det.alpha_hat, first_weekday);

    FitReport fit = css_fit(out.y_adjusted, config);
    out.report.theta_hat = fit.theta_hat;
    out.report.css_value = fit.css_value;
    out.report.starts_tried = fit.starts_tried;
    out.report.converged = fit.converged;
    if (with_se) {
        const auto se = hessian_se(out.y_adjusted, out.report.theta_hat);
        out.report.se = se.first;
        out.report.se_valid = se.second;
    }
    return out;
}

}  // namespace fracuc
