#pragma once

// Simulation study harness: simulate the fractional signal-plus-noise
// process over a (d0, rho, n) grid, fit by CSS and by exact local Whittle at
// several bandwidths, and aggregate mean squared errors plus smoother fit
// quality per cell.
//
// Fits start from theta = (1, 1, 1) with no multistart; per-replication
// seeds are derived from (base seed, cell, replication) so cells and
// replications are reproducible and order-independent.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "estimate.hpp"
#include "filter.hpp"
#include "fracdiff.hpp"
#include "gausscov.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace fracuc {

struct McDesign {
    std::vector<double> d0{0.75, 1.25, 1.75};
    std::vector<double> rho{0.5, 1.0, 2.0};
    std::vector<std::size_t> n{100, 200, 300};
    double sigma_u2 = 1.0;
    int replications = 1000;
    std::uint64_t seed = 20200101;
    std::vector<double> bandwidth_exponents{0.45, 0.50, 0.55, 0.60, 0.65, 0.70};
    int threads = 0;
    double failure_budget = 0.02;  // cell marked failed above this share
};

struct McResultRow {
    std::size_t n = 0;
    double rho = 0.0;
    double d0 = 0.0;
    double mse_d_css = 0.0;
    std::vector<double> mse_d_elw;  // aligned with bandwidth_exponents
    double mse_x = 0.0;
    double r2_x = 0.0;
    double median_abs_err_d = 0.0;
    int failures = 0;
    int replications_used = 0;
    bool failed_cell = false;
};

// eta and u are independent normal draws scaled by the shock standard
// deviations; x integrates eta, y adds noise.  Identical seeds give
// identical paths.
inline std::pair<Series, Series> simulate_dgp(const ThetaParams& theta0, std::size_t n,
                                              std::uint64_t seed) {
    require_valid(theta0);
    if (n == 0) throw std::invalid_argument("simulate_dgp: n must be positive");
    std::mt19937_64 stream(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double s_eta = std::sqrt(theta0.sigma_eta2);
    const double s_u = std::sqrt(theta0.sigma_u2);

    Series eta;
    eta.values.resize(n);
    for (auto& v : eta.values) v = s_eta * gauss(stream);
    std::vector<double> u(n);
    for (auto& v : u) v = s_u * gauss(stream);

    Series x = fracint(eta, theta0.d);
    Series y = x;
    for (std::size_t t = 0; t < n; ++t) y.values[t] += u[t];
    return {std::move(y), std::move(x)};
}

namespace detail {

struct RepOutcome {
    bool ok = false;
    double err_d_css = 0.0;
    std::vector<double> err_d_elw;
    double mse_x = 0.0;
    double r2_x = 0.0;
};

inline RepOutcome run_replication(const ThetaParams& theta0, std::size_t n,
                                  const std::vector<double>& exponents, std::uint64_t seed,
                                  double d_max) {
    RepOutcome out;
    const auto sim = simulate_dgp(theta0, n, seed);
    const Series& y = sim.first;
    const Series& x_true = sim.second;

    EstimationConfig cfg;
    cfg.d_max = d_max;
    const auto fit = css_fit_single(y, ThetaParams{1.0, 1.0, 1.0}, cfg);
    if (!std::isfinite(fit.css)) return out;
    out.err_d_css = fit.theta.d - theta0.d;

    const auto smooth = run_smoother(fit.theta, y);
    const auto quality = smoother_r2(x_true, smooth.x_smooth);
    out.mse_x = quality.first;
    out.r2_x = quality.second;

    out.err_d_elw.reserve(exponents.size());
    for (double ex : exponents) {
        std::size_t m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), ex)));
        m = std::max<std::size_t>(2, std::min(m, n / 2 - 1));
        out.err_d_elw.push_back(elw_estimate(y, m, d_max) - theta0.d);
    }
    out.ok = true;
    return out;
}

}  // namespace detail

inline std::vector<McResultRow> run_study(const McDesign& design) {
    if (design.replications < 1)
        throw std::invalid_argument("run_study: replications must be >= 1");
    if (design.d0.empty() || design.rho.empty() || design.n.empty())
        throw std::invalid_argument("run_study: every design grid must be nonempty");
    std::vector<McResultRow> rows;

    unsigned n_threads = design.threads > 0 ? static_cast<unsigned>(design.threads)
                                            : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;

    std::uint64_t cell_id = 0;
    for (std::size_t n : design.n) {
        for (double rho : design.rho) {
            for (double d0 : design.d0) {
                const ThetaParams theta0{d0, rho * design.sigma_u2, design.sigma_u2};
                const int reps = design.replications;
                std::vector<detail::RepOutcome> outcomes(reps);
                const std::uint64_t cell_seed = derive_seed(design.seed, cell_id);

                auto work = [&](int k) {
                    try {
                        outcomes[k] = detail::run_replication(
                            theta0, n, design.bandwidth_exponents,
                            derive_seed(cell_seed, static_cast<std::uint64_t>(k)), kDefaultDMax);
                    } catch (const std::exception&) {
                        outcomes[k].ok = false;
                    }
                };
                if (n_threads <= 1 || reps <= 1) {
                    for (int k = 0; k < reps; ++k) work(k);
                } else {
                    std::atomic<int> next{0};
                    auto worker = [&]() {
                        for (int k = next.fetch_add(1); k < reps; k = next.fetch_add(1)) work(k);
                    };
                    std::vector<std::thread> pool;
                    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
                    for (auto& t : pool) t.join();
                }

                McResultRow row;
                row.n = n;
                row.rho = rho;
                row.d0 = d0;
                std::vector<double> sq_css, sq_x, r2s, abs_err;
                std::vector<std::vector<double>> sq_elw(design.bandwidth_exponents.size());
                for (const auto& o : outcomes) {
                    if (!o.ok) {
                        ++row.failures;
                        continue;
                    }
                    sq_css.push_back(o.err_d_css * o.err_d_css);
                    abs_err.push_back(std::abs(o.err_d_css));
                    sq_x.push_back(o.mse_x);
                    r2s.push_back(o.r2_x);
                    for (std::size_t b = 0; b < sq_elw.size(); ++b)
                        sq_elw[b].push_back(o.err_d_elw[b] * o.err_d_elw[b]);
                }
                row.replications_used = static_cast<int>(sq_css.size());
                row.failed_cell =
                    row.failures > design.failure_budget * static_cast<double>(reps);
                if (row.replications_used > 0) {
                    const double used = static_cast<double>(row.replications_used);
                    row.mse_d_css = pairwise_sum(sq_css) / used;
                    row.mse_x = pairwise_sum(sq_x) / used;
                    row.r2_x = pairwise_sum(r2s) / used;
                    for (auto& v : sq_elw) row.mse_d_elw.push_back(pairwise_sum(v) / used);
                    std::sort(abs_err.begin(), abs_err.end());
                    const std::size_t mid = abs_err.size() / 2;
                    row.median_abs_err_d = abs_err.size() % 2 == 1
                                               ? abs_err[mid]
                                               : 0.5 * (abs_err[mid - 1] + abs_err[mid]);
                }
                rows.push_back(std::move(row));
                ++cell_id;
            }
        }
    }
    return rows;
}

}  // namespace fracuc
