#pragma once

// End-to-end contact-rate chain shared by the command-line tool and tests:
// measurement construction, deterministic adjustment, CSS fit, smoothing,
// outflow-rate and reproduction-rate estimates, turning points, and the
// threshold policy rule.

#include <optional>
#include <vector>

#include "estimate.hpp"
#include "filter.hpp"
#include "io.hpp"
#include "sir.hpp"

namespace fracuc {

struct SirOptions {
    std::size_t h_bar = 0;  // 0 = keep reported recovered counts
    std::size_t window = 10;
    double threshold = 1.2;
    double bandwidth_exponent = 0.65;
    bool repair_zero_days = true;
    EstimationConfig estimation;
};

struct SirResult {
    Measurement measurement;
    FitReport report;
    Series y_adjusted;
    Series log_beta;  // mu_hat + smoothed latent component, aligned with the measurement
    Series beta;
    Series r_hat;
    double gamma = 0.0;
    std::vector<std::pair<std::size_t, TurningPoint>> turning;  // indices into the measurement
    std::optional<std::size_t> trigger;
    std::vector<Date> repaired_dates;
};

inline SirResult sir_pipeline(const CaseSeries& input, const SirOptions& opt) {
    SirResult out;
    CaseSeries cases = input;
    if (opt.h_bar > 0) cases = synth_recovered(cases, opt.h_bar);
    if (opt.repair_zero_days) {
        auto repaired = apply_zero_delta_repairs(cases);
        cases = std::move(repaired.first);
        out.repaired_dates = std::move(repaired.second);
    }

    out.measurement = build_measurement(cases);
    const auto fit = fit_full(out.measurement.log_y, out.measurement.weekday_of_start,
                              opt.estimation, opt.bandwidth_exponent);
    out.report = fit.report;
    out.y_adjusted = fit.y_adjusted;

    const auto smooth = run_smoother(out.report.theta_hat, out.y_adjusted);
    out.log_beta = smooth.x_smooth;
    for (double& v : out.log_beta.values) v += out.report.mu_hat;
    out.log_beta.origin_index = out.measurement.log_y.origin_index;

    out.beta = out.log_beta;
    for (double& v : out.beta.values) v = std::exp(v);

    out.gamma = gamma_hat(out.beta, cases);
    out.r_hat = reproduction_rate(out.beta, out.gamma);
    out.turning = turning_points(out.beta, opt.window);
    out.trigger = policy_trigger(out.r_hat, opt.threshold);
    return out;
}

}  // namespace fracuc
