// Command-line front end.  Every subcommand is a thin composition of the
// library operations; outputs are buffered in memory and written only on
// success so failures leave no partial files.
//
// Exit codes: 0 ok, 2 input error, 3 numerical failure, 4 configuration error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracuc/bn.hpp"
#include "fracuc/estimate.hpp"
#include "fracuc/filter.hpp"
#include "fracuc/io.hpp"
#include "fracuc/lagpoly.hpp"
#include "fracuc/mc.hpp"
#include "fracuc/pipeline.hpp"
#include "fracuc/sir.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
    std::string input;
    std::string output;
    std::string format = "csv";
    std::uint64_t seed = 1;
    int starts = 100;
    double d_max = fracuc::kDefaultDMax;
    double bandwidth_exp = 0.65;
    std::size_t hbar = 0;
    std::size_t window = 10;
    double threshold = 1.2;
    std::size_t min_sample = 80;
    int threads = 0;
};

fracuc::EstimationConfig estimation_config(const CommonOpts& o) {
    fracuc::EstimationConfig cfg;
    cfg.n_starts = o.starts;
    cfg.d_max = o.d_max;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    return cfg;
}

std::string metadata_header(const std::string& command, const CommonOpts& o,
                            const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    std::ostringstream cfg;
    cfg << "command=" << command << " seed=" << o.seed << " starts=" << o.starts
        << " d_max=" << o.d_max << " bandwidth_exp=" << o.bandwidth_exp << " hbar=" << o.hbar
        << " window=" << o.window << " threshold=" << o.threshold
        << " min_sample=" << o.min_sample;
    std::ostringstream out;
    out << "# fracuc=" << kVersion << "\n";
    out << "# " << cfg.str() << "\n";
    out << "# config_hash=" << std::hex << fracuc::fnv1a_hash(cfg.str()) << std::dec << "\n";
    for (const auto& kv : extra) out << "# " << kv.first << "=" << kv.second << "\n";
    return out.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw fracuc::config_error("cannot write " + path);
    out << content;
}

void append_report_rows(std::ostringstream& os, const fracuc::FitReport& rep) {
    using fracuc::format_double;
    os << "parameter,estimate,se\n";
    os << "d," << format_double(rep.theta_hat.d) << "," << format_double(rep.se[0]) << "\n";
    os << "sigma_eta2," << format_double(rep.theta_hat.sigma_eta2) << ","
       << format_double(rep.se[1]) << "\n";
    os << "sigma_u2," << format_double(rep.theta_hat.sigma_u2) << "," << format_double(rep.se[2])
       << "\n";
    os << "mu," << format_double(rep.mu_hat) << ",\n";
    for (int i = 0; i < 7; ++i)
        os << "alpha_" << (i + 1) << "," << format_double(rep.alpha_hat[i]) << ",\n";
    os << "d_ew," << format_double(rep.d_ew) << ",\n";
    os << "bandwidth_m," << rep.bandwidth_m << ",\n";
    os << "css," << format_double(rep.css_value) << ",\n";
    os << "starts_tried," << rep.starts_tried << ",\n";
    os << "converged," << (rep.converged ? 1 : 0) << ",\n";
    os << "se_valid," << (rep.se_valid ? 1 : 0) << ",\n";
}

nlohmann::json report_to_json(const fracuc::FitReport& rep) {
    nlohmann::json j;
    j["d"] = rep.theta_hat.d;
    j["sigma_eta2"] = rep.theta_hat.sigma_eta2;
    j["sigma_u2"] = rep.theta_hat.sigma_u2;
    j["se"] = {rep.se[0], rep.se[1], rep.se[2]};
    j["se_valid"] = rep.se_valid;
    j["mu"] = rep.mu_hat;
    j["alpha"] = rep.alpha_hat;
    j["d_ew"] = rep.d_ew;
    j["bandwidth_m"] = rep.bandwidth_m;
    j["css"] = rep.css_value;
    j["starts_tried"] = rep.starts_tried;
    j["converged"] = rep.converged;
    return j;
}

// Expand "--config FILE" into per-key flags placed right after the
// subcommand, so explicit command-line flags override the file and unknown
// keys are rejected by the parser.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw fracuc::config_error("--config needs a file");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (config_path.empty()) return kept;
    if (kept.size() < 2) throw fracuc::config_error("--config requires a subcommand");

    // keys already given explicitly win over the file
    auto flag_key = [](const std::string& tok) -> std::string {
        if (tok.rfind("--", 0) != 0) return "";
        const auto eq = tok.find('=');
        return tok.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    };
    std::vector<std::string> explicit_keys;
    for (std::size_t i = 2; i < kept.size(); ++i) {
        const auto key = flag_key(kept[i]);
        if (!key.empty()) explicit_keys.push_back(key);
    }

    std::ifstream in(config_path);
    if (!in) throw fracuc::config_error("cannot read config file " + config_path);
    std::vector<std::string> injected;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw fracuc::config_error("config file line " + std::to_string(ln) +
                                       ": expected key=value");
        const std::string key = line.substr(0, eq);
        bool overridden = false;
        for (const auto& k : explicit_keys) overridden = overridden || k == key;
        if (!overridden) injected.push_back("--" + key + "=" + line.substr(eq + 1));
    }

    std::vector<std::string> out(kept.begin(), kept.begin() + 2);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), kept.begin() + 2, kept.end());
    return out;
}

fracuc::CaseSeries load_cases(const CommonOpts& o) {
    if (o.input.empty()) throw fracuc::config_error("--input is required");
    fracuc::CaseSeries cases = fracuc::parse_cases(o.input);
    if (o.hbar > 0) cases = fracuc::synth_recovered(cases, o.hbar);
    return cases;
}

int cmd_fit(const CommonOpts& o) {
    const auto cases = load_cases(o);
    const auto repaired = fracuc::apply_zero_delta_repairs(cases);
    const auto m = fracuc::build_measurement(repaired.first);
    const auto fit = fracuc::fit_full(m.log_y, m.weekday_of_start, estimation_config(o),
                                      o.bandwidth_exp);
    if (o.format == "json") {
        nlohmann::json j = report_to_json(fit.report);
        j["start_date"] = fracuc::to_iso(m.start_date);
        write_output(o.output, j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream os;
    os << metadata_header("fit", o, {{"start_date", fracuc::to_iso(m.start_date)}});
    append_report_rows(os, fit.report);
    write_output(o.output, os.str());
    return 0;
}

int cmd_filter_or_smooth(const CommonOpts& o, bool smooth) {
    const auto cases = load_cases(o);
    const auto repaired = fracuc::apply_zero_delta_repairs(cases);
    const auto m = fracuc::build_measurement(repaired.first);
    const auto fit = fracuc::fit_full(m.log_y, m.weekday_of_start, estimation_config(o),
                                      o.bandwidth_exp, false);

    std::ostringstream os;
    os << metadata_header(smooth ? "smooth" : "filter", o,
                          {{"d", fracuc::format_double(fit.report.theta_hat.d)},
                           {"sigma_eta2", fracuc::format_double(fit.report.theta_hat.sigma_eta2)},
                           {"sigma_u2", fracuc::format_double(fit.report.theta_hat.sigma_u2)},
                           {"mu", fracuc::format_double(fit.report.mu_hat)},
                           {"css", fracuc::format_double(fit.report.css_value)}});
    if (smooth) {
        const auto sm = fracuc::run_smoother(fit.report.theta_hat, fit.y_adjusted);
        os << "date,y_adj,x_smooth,residual,log_beta\n";
        for (std::size_t t = 0; t < fit.y_adjusted.size(); ++t) {
            os << fracuc::to_iso(fracuc::add_days(m.start_date, static_cast<std::int64_t>(t)))
               << "," << fracuc::format_double(fit.y_adjusted.values[t]) << ","
               << fracuc::format_double(sm.x_smooth.values[t]) << ","
               << fracuc::format_double(sm.residual.values[t]) << ","
               << fracuc::format_double(fit.report.mu_hat + sm.x_smooth.values[t]) << "\n";
        }
    } else {
        const auto fl = fracuc::run_filter(fit.report.theta_hat, fit.y_adjusted);
        os << "date,y_adj,x_pred,v\n";
        for (std::size_t t = 0; t < fit.y_adjusted.size(); ++t) {
            os << fracuc::to_iso(fracuc::add_days(m.start_date, static_cast<std::int64_t>(t)))
               << "," << fracuc::format_double(fit.y_adjusted.values[t]) << ","
               << fracuc::format_double(fl.x_pred.values[t]) << ","
               << fracuc::format_double(fl.v.values[t]) << "\n";
        }
    }
    write_output(o.output, os.str());
    return 0;
}

int cmd_sir(const CommonOpts& o) {
    if (o.input.empty()) throw fracuc::config_error("--input is required");
    const auto cases = fracuc::parse_cases(o.input);

    fracuc::SirOptions opt;
    opt.h_bar = o.hbar;
    opt.window = o.window;
    opt.threshold = o.threshold;
    opt.bandwidth_exponent = o.bandwidth_exp;
    opt.estimation = estimation_config(o);
    const auto res = fracuc::sir_pipeline(cases, opt);

    std::vector<std::string> flags(res.log_beta.size());
    for (const auto& tp : res.turning)
        flags[tp.first] = tp.second == fracuc::TurningPoint::minimum ? "min" : "max";
    if (res.trigger) {
        if (!flags[*res.trigger].empty()) flags[*res.trigger] += "+trigger";
        else flags[*res.trigger] = "trigger";
    }

    std::string repaired;
    for (const auto& d : res.repaired_dates) {
        if (!repaired.empty()) repaired += ";";
        repaired += fracuc::to_iso(d);
    }

    std::ostringstream os;
    os << metadata_header(
        "sir", o,
        {{"gamma_hat", fracuc::format_double(res.gamma)},
         {"d", fracuc::format_double(res.report.theta_hat.d)},
         {"sigma_eta2", fracuc::format_double(res.report.theta_hat.sigma_eta2)},
         {"sigma_u2", fracuc::format_double(res.report.theta_hat.sigma_u2)},
         {"mu", fracuc::format_double(res.report.mu_hat)},
         {"repaired_dates", repaired}});
    os << "date,log_y,log_beta_smooth,r_hat,flag\n";
    for (std::size_t t = 0; t < res.log_beta.size(); ++t) {
        os << fracuc::to_iso(fracuc::add_days(res.measurement.start_date,
                                              static_cast<std::int64_t>(t)))
           << "," << fracuc::format_double(res.measurement.log_y.values[t]) << ","
           << fracuc::format_double(res.log_beta.values[t]) << ","
           << fracuc::format_double(res.r_hat.values[t]) << "," << flags[t] << "\n";
    }
    write_output(o.output, os.str());
    return 0;
}

int cmd_monitor(const CommonOpts& o) {
    if (o.input.empty()) throw fracuc::config_error("--input is required");
    const auto cases = fracuc::parse_cases(o.input);
    const auto repaired = fracuc::apply_zero_delta_repairs(
        o.hbar > 0 ? fracuc::synth_recovered(cases, o.hbar) : cases);
    const auto m = fracuc::build_measurement(repaired.first);
    const auto trace = fracuc::monitor_recursive(m.log_y, m.weekday_of_start, o.min_sample,
                                                 estimation_config(o));
    if (trace.truncated)
        std::cerr << "monitor: trace truncated (" << trace.failure << ")\n";

    std::ostringstream os;
    os << metadata_header("monitor", o,
                          {{"truncated", trace.truncated ? "1" : "0"},
                           {"failure", trace.failure}});
    os << "date,t,log_y,beta_realtime,beta_fullsample,benchmark,d,sigma_eta2,sigma_u2\n";
    for (std::size_t k = 0; k < trace.t_index.size(); ++k) {
        const std::size_t t = trace.t_index[k];
        os << fracuc::to_iso(fracuc::add_days(m.start_date, static_cast<std::int64_t>(t - 4)))
           << "," << t << "," << fracuc::format_double(m.log_y.values[t - 4]) << ","
           << fracuc::format_double(trace.beta_realtime[k]) << ","
           << fracuc::format_double(trace.truncated ? std::numeric_limits<double>::quiet_NaN()
                                                    : trace.beta_fullsample[k])
           << "," << fracuc::format_double(trace.benchmark[k]) << ","
           << fracuc::format_double(trace.theta_path[k].d) << ","
           << fracuc::format_double(trace.theta_path[k].sigma_eta2) << ","
           << fracuc::format_double(trace.theta_path[k].sigma_u2) << "\n";
    }
    write_output(o.output, os.str());
    return 0;
}

int cmd_mc(const CommonOpts& o, fracuc::McDesign design) {
    design.seed = o.seed;
    design.threads = o.threads;
    const auto rows = fracuc::run_study(design);

    std::ostringstream os;
    os << metadata_header("mc", o,
                          {{"replications", std::to_string(design.replications)}});
    os << "n,rho,d0,mse_d_css";
    for (double ex : design.bandwidth_exponents) {
        std::ostringstream tag;
        tag << "mse_d_elw_" << ex;
        os << "," << tag.str();
    }
    os << ",mse_x,r2_x,failures,replications_used,failed\n";
    for (const auto& r : rows) {
        os << r.n << "," << fracuc::format_double(r.rho) << "," << fracuc::format_double(r.d0)
           << "," << fracuc::format_double(r.mse_d_css);
        for (double v : r.mse_d_elw) os << "," << fracuc::format_double(v);
        os << "," << fracuc::format_double(r.mse_x) << "," << fracuc::format_double(r.r2_x) << ","
           << r.failures << "," << r.replications_used << "," << (r.failed_cell ? 1 : 0) << "\n";
    }
    write_output(o.output, os.str());
    return 0;
}

int cmd_bn(const CommonOpts& o, double d, const std::vector<double>& phi, double var_eta,
           double var_eps, double cov) {
    if (o.input.empty()) throw fracuc::config_error("--input is required");
    const auto lines = fracuc::detail::read_lines(o.input);
    if (lines.size() < 2 || lines[0] != "t,value")
        throw fracuc::input_error("bn: expected header 't,value'");
    fracuc::Series y;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto f = fracuc::detail::split_csv_line(lines[r]);
        if (f.size() != 2) throw fracuc::input_error("bn: bad row " + std::to_string(r + 1));
        y.values.push_back(fracuc::detail::parse_number(f[1], r + 1, 2));
    }

    const fracuc::LagPolynomial poly(phi);
    const std::size_t horizon = 10 * y.size();
    const auto theta_eps = fracuc::truncate_ma(fracuc::lagpoly_invert(poly, d, horizon));
    const auto agg = fracuc::aggregate_theta_u(theta_eps, {var_eta, var_eps, cov});
    const auto u = fracuc::derive_reduced_innovations(y, d, agg.theta_u);
    const auto bn = fracuc::bn_decompose(y, d, agg.theta_u, agg.sigma_u2, u);

    std::ostringstream os;
    os << metadata_header("bn", o,
                          {{"d", fracuc::format_double(d)},
                           {"sigma_u2", fracuc::format_double(agg.sigma_u2)}});
    os << "t,y,trend,cycle,u\n";
    for (std::size_t t = 0; t < y.size(); ++t) {
        os << (t + 1) << "," << fracuc::format_double(y.values[t]) << ","
           << fracuc::format_double(bn.trend.values[t]) << ","
           << fracuc::format_double(bn.cycle.values[t]) << ","
           << fracuc::format_double(u.values[t]) << "\n";
    }
    write_output(o.output, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional unobserved-components toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    fracuc::McDesign design;
    double bn_d = 1.0;
    std::vector<double> bn_phi;
    double bn_var_eta = 1.0, bn_var_eps = 1.0, bn_cov = 0.0;

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input) sub->add_option("--input", o.input, "input CSV");
        sub->add_option("--output", o.output, "output path ('-' = stdout)");
        sub->add_option("--format", o.format, "output format: csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--starts", o.starts, "multistart count")->check(CLI::PositiveNumber);
        sub->add_option("--d-max", o.d_max, "upper bound of the integration order");
        sub->add_option("--bandwidth-exp", o.bandwidth_exp, "local Whittle bandwidth exponent");
        sub->add_option("--hbar", o.hbar, "synthetic recovered horizon (0 = off)");
        sub->add_option("--window", o.window, "turning point window");
        sub->add_option("--threshold", o.threshold, "policy trigger threshold");
        sub->add_option("--min-sample", o.min_sample, "first monitoring sample size");
        sub->add_option("--threads", o.threads, "worker threads (0 = hardware)");
    };

    auto* fit = app.add_subcommand("fit", "estimate model parameters from case data");
    add_common(fit, true);
    auto* filter = app.add_subcommand("filter", "one-step predictions and prediction errors");
    add_common(filter, true);
    auto* smooth = app.add_subcommand("smooth", "full-sample latent component estimate");
    add_common(smooth, true);
    auto* sir = app.add_subcommand("sir", "full contact-rate pipeline");
    add_common(sir, true);
    auto* monitor = app.add_subcommand("monitor", "recursive real-time estimates");
    add_common(monitor, true);

    auto* mc = app.add_subcommand("mc", "simulation study over a parameter grid");
    add_common(mc, false);
    mc->add_option("--reps", design.replications, "replications per cell");
    mc->add_option("--n", design.n, "sample sizes")->delimiter(',');
    mc->add_option("--rho", design.rho, "signal-to-noise ratios")->delimiter(',');
    mc->add_option("--d0", design.d0, "true integration orders")->delimiter(',');
    mc->add_option("--bandwidth-exps", design.bandwidth_exponents,
                   "local Whittle bandwidth exponents")
        ->delimiter(',');

    auto* bn = app.add_subcommand("bn", "trend-cycle split of an adjusted series");
    add_common(bn, true);
    bn->add_option("--d", bn_d, "integration order")->required();
    bn->add_option("--phi", bn_phi, "cycle polynomial coefficients")->delimiter(',');
    bn->add_option("--sigma-eta2", bn_var_eta, "trend shock variance");
    bn->add_option("--sigma-eps2", bn_var_eps, "cycle shock variance");
    bn->add_option("--cov-eta-eps", bn_cov, "shock covariance");

    app.footer("Any subcommand accepts --config FILE with key=value lines naming the long\n"
               "options above (without the leading dashes); explicit flags take precedence.");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        reversed.pop_back();  // program name
        app.parse(reversed);
    } catch (const fracuc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (fit->parsed()) return cmd_fit(o);
        if (filter->parsed()) return cmd_filter_or_smooth(o, false);
        if (smooth->parsed()) return cmd_filter_or_smooth(o, true);
        if (sir->parsed()) return cmd_sir(o);
        if (monitor->parsed()) return cmd_monitor(o);
        if (mc->parsed()) return cmd_mc(o, design);
        if (bn->parsed()) return cmd_bn(o, bn_d, bn_phi, bn_var_eta, bn_var_eps, bn_cov);
    } catch (const fracuc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const fracuc::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 4;
}
