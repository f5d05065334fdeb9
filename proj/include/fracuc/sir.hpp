#pragma once

// Contact-rate measurement from cumulative case counts and derived
// epidemiological quantities.
//
// With proportions S_t = 1 - C_t/pop and I_t = (C_t - R_t - D_t)/pop, the
// daily measurement is Y_t = dC_t / (I_{t-1} S_{t-1}); its log is the noisy
// observation decomposed by the unobserved-components machinery.  The module
// also carries data repairs (zero-increment smoothing, synthetic recovered
// counts), turning points, a threshold policy rule, and the recursive
// real-time monitoring loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "filter.hpp"
#include "series.hpp"

namespace fracuc {

struct CaseSeries {
    std::vector<Date> dates;        // strictly consecutive days
    std::vector<double> confirmed;  // cumulative counts
    std::vector<double> recovered;
    std::vector<double> deceased;
    double population = 0.0;

    std::size_t size() const { return dates.size(); }
};

inline void require_valid(const CaseSeries& cs, const char* who) {
    const std::size_t n = cs.size();
    if (n == 0) throw input_error(std::string(who) + ": empty case series");
    if (cs.confirmed.size() != n || cs.recovered.size() != n || cs.deceased.size() != n)
        throw input_error(std::string(who) + ": column lengths differ");
    if (!(cs.population > 0.0))
        throw config_error(std::string(who) + ": population missing or not positive");
    for (std::size_t t = 0; t < n; ++t) {
        if (cs.confirmed[t] < 0 || cs.recovered[t] < 0 || cs.deceased[t] < 0)
            throw input_error(std::string(who) + ": negative count on " + to_iso(cs.dates[t]));
        if (cs.recovered[t] + cs.deceased[t] > cs.confirmed[t] + 1e-9)
            throw input_error(std::string(who) + ": recovered+deceased exceed confirmed on " +
                              to_iso(cs.dates[t]));
        if (t > 0) {
            if (days_from_civil(cs.dates[t]) != days_from_civil(cs.dates[t - 1]) + 1)
                throw input_error(std::string(who) + ": date gap before " + to_iso(cs.dates[t]));
            if (cs.confirmed[t] < cs.confirmed[t - 1] || cs.recovered[t] < cs.recovered[t - 1] ||
                cs.deceased[t] < cs.deceased[t - 1])
                throw input_error(std::string(who) + ": cumulative counts decrease on " +
                                  to_iso(cs.dates[t]));
        }
    }
}

struct Measurement {
    Series log_y;          // log Y_t; origin_index = 1-based position of its first entry in the case series
    Date start_date;       // date of the first measurement entry
    int weekday_of_start;  // weekday (0..6, 0 = Sunday) of start_date
};

// Measurement construction.  The first measurement day is the first date
// with at least 100 cumulative confirmed cases (or the second day of the
// series, whichever is later, since the previous day's state is needed).
inline Measurement build_measurement(const CaseSeries& cases) {
    require_valid(cases, "build_measurement");
    const std::size_t n = cases.size();
    const double pop = cases.population;

    std::size_t a = n;
    for (std::size_t t = 0; t < n; ++t)
        if (cases.confirmed[t] >= 100.0) { a = t; break; }
    if (a == n) throw input_error("build_measurement: cumulative confirmed never reaches 100");
    if (a == 0) a = 1;
    if (a >= n) throw input_error("build_measurement: no observations after the start threshold");

    Measurement m;
    m.log_y.values.reserve(n - a);
    m.log_y.origin_index = static_cast<long>(a + 1);
    m.start_date = cases.dates[a];
    m.weekday_of_start = weekday_of(cases.dates[a]);

    for (std::size_t t = a; t < n; ++t) {
        const double dc = cases.confirmed[t] - cases.confirmed[t - 1];
        if (dc <= 0.0)
            throw input_error(std::string("build_measurement: non-positive confirmed increment on ") +
                              to_iso(cases.dates[t]) +
                              (dc == 0.0 ? " (zero_delta_adjust may repair an isolated zero day)" : ""));
        const double s_prev = 1.0 - cases.confirmed[t - 1] / pop;
        const double i_prev =
            (cases.confirmed[t - 1] - cases.recovered[t - 1] - cases.deceased[t - 1]) / pop;
        if (i_prev <= 0.0)
            throw input_error(std::string("build_measurement: degenerate state (no infected) on ") +
                              to_iso(cases.dates[t - 1]));
        m.log_y.values.push_back(std::log((dc / pop) / (i_prev * s_prev)));
    }
    return m;
}

// Repair an isolated zero increment at index t (0-based) by averaging the
// neighbors: the zero day receives one third of the two adjacent increments,
// which keep two thirds of theirs; cumulative counts from t+1 on are
// unchanged.
inline CaseSeries zero_delta_adjust(const CaseSeries& cases, std::size_t t) {
    require_valid(cases, "zero_delta_adjust");
    const std::size_t n = cases.size();
    if (t < 1 || t + 1 >= n)
        throw std::invalid_argument("zero_delta_adjust: index has no neighbors");
    const double prev = cases.confirmed[t - 1] - (t >= 2 ? cases.confirmed[t - 2] : 0.0);
    const double here = cases.confirmed[t] - cases.confirmed[t - 1];
    const double next = cases.confirmed[t + 1] - cases.confirmed[t];
    if (here != 0.0 || prev <= 0.0 || next <= 0.0)
        throw std::invalid_argument("zero_delta_adjust: needs a zero increment between positive ones");

    CaseSeries out = cases;
    const double base = t >= 2 ? cases.confirmed[t - 2] : 0.0;
    out.confirmed[t - 1] = base + (2.0 / 3.0) * prev;
    out.confirmed[t] = out.confirmed[t - 1] + (prev + next) / 3.0;
    // out.confirmed[t + 1] is unchanged: 2/3 next on top of the shifted level
    return out;
}

// Repair every isolated interior zero increment; returns the repaired series
// and the dates touched.
inline std::pair<CaseSeries, std::vector<Date>> apply_zero_delta_repairs(CaseSeries cases) {
    std::vector<Date> repaired;
    for (std::size_t t = 1; t + 1 < cases.size(); ++t) {
        const double prev = cases.confirmed[t - 1] - (t >= 2 ? cases.confirmed[t - 2] : 0.0);
        const double here = cases.confirmed[t] - cases.confirmed[t - 1];
        const double next = cases.confirmed[t + 1] - cases.confirmed[t];
        if (here == 0.0 && prev > 0.0 && next > 0.0) {
            cases = zero_delta_adjust(cases, t);
            repaired.push_back(cases.dates[t]);
        }
    }
    return {std::move(cases), std::move(repaired)};
}

// Synthetic recovered counts under the assumption that every case resolves
// h_bar days after confirmation: recovered_t = max(confirmed_{t-h_bar} - deceased_t, 0).
inline CaseSeries synth_recovered(const CaseSeries& cases, std::size_t h_bar) {
    require_valid(cases, "synth_recovered");
    if (h_bar >= cases.size())
        throw std::invalid_argument("synth_recovered: h_bar must be shorter than the series");
    CaseSeries out = cases;
    for (std::size_t t = 0; t < cases.size(); ++t) {
        const double lagged = t >= h_bar ? cases.confirmed[t - h_bar] : 0.0;
        out.recovered[t] = std::max(lagged - cases.deceased[t], 0.0);
    }
    return out;
}

// One series per lag h: confirmed_{t-h} - recovered_t - deceased_t (counts).
inline std::vector<Series> underreporting_diag(const CaseSeries& cases,
                                               const std::vector<std::size_t>& lags) {
    require_valid(cases, "underreporting_diag");
    const std::size_t n = cases.size();
    std::vector<Series> out;
    out.reserve(lags.size());
    for (std::size_t h : lags) {
        if (h >= n) throw std::invalid_argument("underreporting_diag: lag exceeds series length");
        Series s;
        s.values.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double lagged = t >= h ? cases.confirmed[t - h] : 0.0;
            s.values[t] = lagged - cases.recovered[t] - cases.deceased[t];
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Average outflow rate implied by a contact-rate path:
//   gamma_hat = mean over t of [ beta_t S_{t-1} - dI_t / I_{t-1} ].
// beta_hat's origin_index gives its alignment within the case series.
inline double gamma_hat(const Series& beta_hat, const CaseSeries& cases) {
    require_valid(beta_hat, "gamma_hat");
    require_valid(cases, "gamma_hat");
    if (beta_hat.size() < 2) throw std::invalid_argument("gamma_hat: need at least 2 entries");
    const std::size_t off = static_cast<std::size_t>(beta_hat.origin_index - 1);
    if (beta_hat.origin_index < 1 || off + beta_hat.size() > cases.size())
        throw std::invalid_argument("gamma_hat: beta series not aligned within the case series");

    const double pop = cases.population;
    auto infected = [&](std::size_t k) {
        return (cases.confirmed[k] - cases.recovered[k] - cases.deceased[k]) / pop;
    };
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 1; t < beta_hat.size(); ++t) {
        const std::size_t k = off + t;  // case-series index of measurement t+1 (1-based t+1)
        const double i_prev = infected(k - 1);
        if (i_prev <= 0.0)
            throw input_error("gamma_hat: degenerate state (no infected) on " + to_iso(cases.dates[k - 1]));
        const double s_prev = 1.0 - cases.confirmed[k - 1] / pop;
        const double di = infected(k) - i_prev;
        acc += beta_hat.values[t] * s_prev - di / i_prev;
        ++used;
    }
    return acc / static_cast<double>(used);
}

inline Series reproduction_rate(const Series& beta_hat, double gamma) {
    require_valid(beta_hat, "reproduction_rate");
    if (!(gamma > 0.0)) throw std::invalid_argument("reproduction_rate: gamma must be positive");
    Series out = beta_hat;
    for (double& v : out.values) v /= gamma;
    return out;
}

enum class TurningPoint { minimum, maximum };

// Index t (0-based) is a minimum (maximum) when its value is below (above)
// every one of the next `window` values.  The last `window` indices are
// never flagged.
inline std::vector<std::pair<std::size_t, TurningPoint>> turning_points(
    const Series& beta_hat, std::size_t window = 10) {
    require_valid(beta_hat, "turning_points");
    if (window < 1) throw std::invalid_argument("turning_points: window must be >= 1");
    std::vector<std::pair<std::size_t, TurningPoint>> out;
    const std::size_t n = beta_hat.size();
    for (std::size_t t = 0; t + window < n; ++t) {
        bool below = true, above = true;
        for (std::size_t j = t + 1; j <= t + window; ++j) {
            below = below && beta_hat.values[t] < beta_hat.values[j];
            above = above && beta_hat.values[t] > beta_hat.values[j];
        }
        if (below) out.emplace_back(t, TurningPoint::minimum);
        else if (above) out.emplace_back(t, TurningPoint::maximum);
    }
    return out;
}

inline std::optional<std::size_t> policy_trigger(const Series& r_series, double threshold = 1.2) {
    for (std::size_t t = 0; t < r_series.size(); ++t)
        if (r_series.values[t] > threshold) return t;
    return std::nullopt;
}

// ---- recursive real-time monitoring ----------------------------------------

struct MonitorTrace {
    std::vector<std::size_t> t_index;      // sample size at each step (1-based count)
    std::vector<double> beta_realtime;     // log beta_{t-3|t}
    std::vector<double> beta_fullsample;   // log beta_{t-3|n}
    std::vector<double> benchmark;         // 7-day mean of log Y ending at t
    std::vector<ThetaParams> theta_path;
    bool truncated = false;
    std::string failure;
};

// For every t = r..n, re-estimate deterministic terms and theta on the first
// t observations (full multistart at t = r and every 30 steps, a single
// warm-started run otherwise) and record the smoothed log contact rate three
// days back.  Only data up to t enter step t.
inline MonitorTrace monitor_recursive(const Series& logY, int weekday_of_start, std::size_t r,
                                      const EstimationConfig& config,
                                      std::size_t smoothing_lag = 3) {
    require_valid(logY, "monitor_recursive");
    const std::size_t n = logY.size();
    if (r > n) throw std::invalid_argument("monitor_recursive: r exceeds the sample");
    if (r < 20 + smoothing_lag)
        throw std::invalid_argument("monitor_recursive: r too small for estimation");

    MonitorTrace trace;
    ThetaParams warm;
    bool have_warm = false;
    double mu_n = 0.0;
    ThetaParams theta_n;
    Series yadj_n;

    for (std::size_t t = r; t <= n; ++t) {
        Series window(std::vector<double>(logY.values.begin(), logY.values.begin() + t),
                      logY.origin_index);
        try {
            const int m = default_bandwidth(t);
            const double d_ew = elw_estimate(window, static_cast<std::size_t>(m), config.d_max);
            const auto det = deterministic_fit(window, d_ew, weekday_of_start);
            const Series y_adj = adjust(window, det.mu_hat, det.alpha_hat, weekday_of_start);

            ThetaParams theta;
            if (!have_warm || (t - r) % 30 == 0) {
                theta = css_fit(y_adj, config).theta_hat;
            } else {
                theta = css_fit_single(y_adj, warm, config).theta;
            }
            warm = theta;
            have_warm = true;

            const auto smooth = run_smoother(theta, y_adj);
            trace.t_index.push_back(t);
            trace.beta_realtime.push_back(det.mu_hat +
                                          smooth.x_smooth.values[t - 1 - smoothing_lag]);
            trace.theta_path.push_back(theta);
            double bench = 0.0;
            for (std::size_t i = 0; i < 7; ++i) bench += logY.values[t - 1 - i];
            trace.benchmark.push_back(bench / 7.0);

            if (t == n) {
                mu_n = det.mu_hat;
                theta_n = theta;
                yadj_n = y_adj;
            }
        } catch (const std::exception& e) {
            trace.truncated = true;
            trace.failure = std::string("step t=") + std::to_string(t) + ": " + e.what();
            return trace;
        }
    }

    const auto smooth_n = run_smoother(theta_n, yadj_n);
    trace.beta_fullsample.reserve(trace.t_index.size());
    for (std::size_t t : trace.t_index)
        trace.beta_fullsample.push_back(mu_n + smooth_n.x_smooth.values[t - 1 - smoothing_lag]);
    return trace;
}

// ---- forward model -----------------------------------------------------------

// Forward-simulate the discrete susceptible/infected/recovered/deceased
// recursion under a daily contact path.  contact[k] drives the flow from day
// k to day k+1.  Initial confirmed cases all count as infected.
inline CaseSeries simulate_sir(const std::vector<double>& contact, double gamma_r, double gamma_d,
                               double initial_confirmed, double population, Date start_date) {
    if (contact.empty()) throw std::invalid_argument("simulate_sir: empty contact path");
    if (!(population > 0.0) || initial_confirmed <= 0.0 || initial_confirmed >= population)
        throw std::invalid_argument("simulate_sir: bad initial state");
    if (gamma_r < 0.0 || gamma_d < 0.0 || gamma_r + gamma_d > 1.0)
        throw std::invalid_argument("simulate_sir: bad outflow rates");

    const std::size_t n = contact.size() + 1;
    CaseSeries cs;
    cs.population = population;
    cs.dates.resize(n);
    cs.confirmed.resize(n);
    cs.recovered.resize(n);
    cs.deceased.resize(n);

    double c = initial_confirmed / population;
    double i = c, rr = 0.0, dd = 0.0;
    cs.dates[0] = start_date;
    cs.confirmed[0] = c * population;
    cs.recovered[0] = 0.0;
    cs.deceased[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double s_prev = 1.0 - c;
        const double i_prev = i;
        const double dc = contact[k - 1] * s_prev * i_prev;
        const double dr = gamma_r * i_prev;
        const double dm = gamma_d * i_prev;
        c += dc;
        rr += dr;
        dd += dm;
        i += dc - dr - dm;
        if (i <= 0.0) throw numerical_error("simulate_sir: infected pool died out at day " +
                                            std::to_string(k));
        cs.dates[k] = add_days(start_date, static_cast<std::int64_t>(k));
        cs.confirmed[k] = c * population;
        cs.recovered[k] = rr * population;
        cs.deceased[k] = dd * population;
    }
    return cs;
}

}  // namespace fracuc
