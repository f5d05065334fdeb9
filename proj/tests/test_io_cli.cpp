#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fracuc/bn.hpp"
#include "fracuc/io.hpp"
#include "fracuc/lagpoly.hpp"
#include "fracuc/mc.hpp"
#include "fracuc/pipeline.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("fracuc_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// fixture: a forward-simulated epidemic with weekly reporting seasonality
// and measurement noise, in the long layout
fracuc::CaseSeries fixture_cases(std::size_t days = 160) {
    const std::array<double, 7> alpha{0.06, -0.05, 0.03, -0.01, 0.02, -0.03, -0.02};
    std::mt19937_64 rng(314159);
    std::normal_distribution<double> g(0.0, 0.25);
    const fracuc::Date start{2020, 3, 2};
    std::vector<double> contact(days);
    for (std::size_t t = 0; t < days; ++t) {
        const double smooth = 0.09 * std::exp(0.35 * std::sin(static_cast<double>(t) / 25.0));
        const int wd = fracuc::weekday_of(fracuc::add_days(start, static_cast<std::int64_t>(t) + 1));
        contact[t] = smooth * std::exp(alpha[wd] + g(rng));
    }
    return fracuc::simulate_sir(contact, 0.045, 0.005, 800.0, 2e6, start);
}

std::string to_long_csv(const fracuc::CaseSeries& cs) {
    std::ostringstream os;
    os << "date,confirmed,recovered,deceased,population\n";
    for (std::size_t t = 0; t < cs.size(); ++t)
        os << fracuc::to_iso(cs.dates[t]) << "," << fracuc::format_double(cs.confirmed[t]) << ","
           << fracuc::format_double(cs.recovered[t]) << ","
           << fracuc::format_double(cs.deceased[t]) << ","
           << fracuc::format_double(cs.population) << "\n";
    return os.str();
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("FRACUC_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

// parse "key,value[,...]" rows and "# k=v" metadata of an output file
struct ParsedCsv {
    std::map<std::string, std::string> meta;
    std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_output(const fs::path& p) {
    ParsedCsv out;
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                auto key = line.substr(2, eq - 2);
                out.meta[key] = line.substr(eq + 1);
            }
            continue;
        }
        out.rows.push_back(fracuc::detail::split_csv_line(line));
    }
    return out;
}

}  // namespace

TEST_CASE("calendar helpers") {
    REQUIRE(fracuc::weekday_of(fracuc::Date{2020, 3, 1}) == 0);  // a Sunday
    REQUIRE(fracuc::weekday_of(fracuc::Date{2020, 3, 2}) == 1);
    REQUIRE(fracuc::to_iso(fracuc::Date{2020, 3, 1}) == "2020-03-01");
    REQUIRE(fracuc::parse_iso_date("2021-12-31") == fracuc::Date{2021, 12, 31});
    REQUIRE(fracuc::parse_mdy_date("1/22/20") == fracuc::Date{2020, 1, 22});
    REQUIRE(fracuc::add_days(fracuc::Date{2020, 2, 28}, 2) == fracuc::Date{2020, 3, 1});
    REQUIRE_THROWS_AS(fracuc::parse_iso_date("2020-02-30"), std::invalid_argument);
}

TEST_CASE("long layout parsing") {
    const auto dir = scratch_dir();

    SECTION("round trip") {
        const auto cs = fixture_cases(40);
        const auto path = dir / "cases.csv";
        write_file(path, to_long_csv(cs));
        const auto back = fracuc::parse_long(path.string());
        REQUIRE(back.size() == cs.size());
        REQUIRE(back.population == cs.population);
        for (std::size_t t = 0; t < cs.size(); ++t) {
            REQUIRE(back.dates[t] == cs.dates[t]);
            REQUIRE(back.confirmed[t] == Catch::Approx(cs.confirmed[t]).epsilon(1e-12));
        }
    }

    SECTION("header-only file is empty input") {
        const auto path = dir / "empty.csv";
        write_file(path, "date,confirmed,recovered,deceased,population\n");
        try {
            fracuc::parse_long(path.string());
            FAIL("expected parse error");
        } catch (const fracuc::parse_error& e) {
            REQUIRE(e.code == fracuc::ParseCode::empty_input);
        }
    }

    SECTION("missing population is a configuration error") {
        const auto path = dir / "nopop.csv";
        write_file(path,
                   "date,confirmed,recovered,deceased\n2020-03-01,100,0,0\n2020-03-02,120,0,0\n");
        REQUIRE_THROWS_AS(fracuc::parse_long(path.string()), fracuc::config_error);
    }

    SECTION("date gaps carry the line number") {
        const auto path = dir / "gap.csv";
        write_file(path,
                   "date,confirmed,recovered,deceased,population\n"
                   "2020-03-01,100,0,0,1000000\n"
                   "2020-03-03,120,0,0,1000000\n");
        try {
            fracuc::parse_long(path.string());
            FAIL("expected parse error");
        } catch (const fracuc::parse_error& e) {
            REQUIRE(e.code == fracuc::ParseCode::date_gap);
            REQUIRE(e.line == 3);
        }
    }
}

TEST_CASE("wide layout parsing") {
    const auto dir = scratch_dir();

    SECTION("three rows and two dates") {
        const auto path = dir / "wide.csv";
        write_file(path,
                   "series,region,population,3/1/20,3/2/20\n"
                   "confirmed,all,1000000,150,190\n"
                   "recovered,all,1000000,10,25\n"
                   "deceased,all,1000000,1,2\n");
        const auto cs = fracuc::parse_jhu_wide(path.string());
        REQUIRE(cs.size() == 2);
        REQUIRE(cs.population == 1000000.0);
        REQUIRE(cs.confirmed[1] == 190.0);
        REQUIRE(cs.dates[0] == fracuc::Date{2020, 3, 1});
    }

    SECTION("sub-regions are summed") {
        const auto path = dir / "wide2.csv";
        write_file(path,
                   "series,region,population,3/1/20,3/2/20\n"
                   "confirmed,north,600000,100,120\n"
                   "confirmed,south,400000,50,70\n"
                   "recovered,all,0,10,25\n"
                   "deceased,all,0,1,2\n");
        const auto cs = fracuc::parse_jhu_wide(path.string());
        REQUIRE(cs.population == 1000000.0);
        REQUIRE(cs.confirmed[0] == 150.0);
        REQUIRE(cs.confirmed[1] == 190.0);
    }

    SECTION("decreasing cumulative counts name the date") {
        const auto path = dir / "wide3.csv";
        write_file(path,
                   "series,region,population,3/1/20,3/2/20\n"
                   "confirmed,all,1000000,150,140\n"
                   "recovered,all,0,10,25\n"
                   "deceased,all,0,1,2\n");
        try {
            fracuc::parse_jhu_wide(path.string());
            FAIL("expected parse error");
        } catch (const fracuc::parse_error& e) {
            REQUIRE(e.code == fracuc::ParseCode::non_monotone);
            REQUIRE(std::string(e.what()).find("2020-03-02") != std::string::npos);
        }
    }
}

TEST_CASE("command line matches the library") {
    const auto dir = scratch_dir();
    const auto cases = fixture_cases();
    const auto input = dir / "pipeline_cases.csv";
    write_file(input, to_long_csv(cases));

    SECTION("fit") {
        const auto out = dir / "fit.csv";
        const int rc = run_cli("fit --input " + input.string() + " --output " + out.string() +
                               " --seed 11 --starts 6");
        REQUIRE(rc == 0);
        const auto parsed = parse_output(out);

        fracuc::EstimationConfig cfg;
        cfg.n_starts = 6;
        cfg.seed = 11;
        const auto m = fracuc::build_measurement(cases);
        const auto direct = fracuc::fit_full(m.log_y, m.weekday_of_start, cfg, 0.65);

        std::map<std::string, std::pair<std::string, std::string>> by_name;
        for (const auto& row : parsed.rows)
            if (row.size() >= 2) by_name[row[0]] = {row[1], row.size() > 2 ? row[2] : ""};
        REQUIRE(by_name.count("d") == 1);
        REQUIRE(std::stod(by_name["d"].first) ==
                Catch::Approx(direct.report.theta_hat.d).epsilon(1e-10));
        REQUIRE(std::stod(by_name["sigma_eta2"].first) ==
                Catch::Approx(direct.report.theta_hat.sigma_eta2).epsilon(1e-10));
        REQUIRE(std::stod(by_name["sigma_u2"].first) ==
                Catch::Approx(direct.report.theta_hat.sigma_u2).epsilon(1e-10));
        REQUIRE(std::stod(by_name["mu"].first) ==
                Catch::Approx(direct.report.mu_hat).epsilon(1e-10));
        // estimate + standard error per model parameter
        for (const char* name : {"d", "sigma_eta2", "sigma_u2"})
            REQUIRE_FALSE(by_name[name].second.empty());
    }

    SECTION("sir") {
        const auto out = dir / "sir.csv";
        const int rc = run_cli("sir --input " + input.string() + " --output " + out.string() +
                               " --seed 11 --starts 6");
        REQUIRE(rc == 0);
        const auto parsed = parse_output(out);

        fracuc::SirOptions opt;
        opt.estimation.n_starts = 6;
        opt.estimation.seed = 11;
        const auto direct = fracuc::sir_pipeline(cases, opt);
        REQUIRE(parsed.rows.size() == direct.log_beta.size() + 1);  // header row
        REQUIRE(std::stod(parsed.meta.at("gamma_hat")) ==
                Catch::Approx(direct.gamma).epsilon(1e-10));
        for (std::size_t t = 0; t < direct.log_beta.size(); ++t) {
            const auto& row = parsed.rows[t + 1];
            REQUIRE(std::stod(row[2]) == Catch::Approx(direct.log_beta.values[t]).epsilon(1e-9));
            REQUIRE(std::stod(row[3]) == Catch::Approx(direct.r_hat.values[t]).epsilon(1e-9));
        }
    }

    SECTION("filter and smooth") {
        fracuc::EstimationConfig cfg;
        cfg.n_starts = 6;
        cfg.seed = 11;
        const auto repaired = fracuc::apply_zero_delta_repairs(cases);
        const auto m = fracuc::build_measurement(repaired.first);
        const auto direct = fracuc::fit_full(m.log_y, m.weekday_of_start, cfg, 0.65, false);

        const auto out_f = dir / "filter.csv";
        REQUIRE(run_cli("filter --input " + input.string() + " --output " + out_f.string() +
                        " --seed 11 --starts 6") == 0);
        const auto pf = parse_output(out_f);
        const auto fl = fracuc::run_filter(direct.report.theta_hat, direct.y_adjusted);
        REQUIRE(pf.rows.size() == direct.y_adjusted.size() + 1);
        for (std::size_t t = 0; t < direct.y_adjusted.size(); ++t) {
            REQUIRE(std::stod(pf.rows[t + 1][2]) ==
                    Catch::Approx(fl.x_pred.values[t]).margin(1e-12));
            REQUIRE(std::stod(pf.rows[t + 1][3]) ==
                    Catch::Approx(fl.v.values[t]).margin(1e-12));
        }

        const auto out_s = dir / "smooth.csv";
        REQUIRE(run_cli("smooth --input " + input.string() + " --output " + out_s.string() +
                        " --seed 11 --starts 6") == 0);
        const auto ps = parse_output(out_s);
        const auto sm = fracuc::run_smoother(direct.report.theta_hat, direct.y_adjusted);
        for (std::size_t t = 0; t < direct.y_adjusted.size(); ++t) {
            REQUIRE(std::stod(ps.rows[t + 1][2]) ==
                    Catch::Approx(sm.x_smooth.values[t]).margin(1e-12));
            REQUIRE(std::stod(ps.rows[t + 1][4]) ==
                    Catch::Approx(direct.report.mu_hat + sm.x_smooth.values[t]).margin(1e-12));
        }
    }

    SECTION("monitor") {
        const auto out = dir / "monitor.csv";
        REQUIRE(run_cli("monitor --input " + input.string() + " --output " + out.string() +
                        " --seed 11 --starts 4 --min-sample 130") == 0);
        const auto parsed = parse_output(out);

        fracuc::EstimationConfig cfg;
        cfg.n_starts = 4;
        cfg.seed = 11;
        const auto repaired = fracuc::apply_zero_delta_repairs(cases);
        const auto m = fracuc::build_measurement(repaired.first);
        const auto trace = fracuc::monitor_recursive(m.log_y, m.weekday_of_start, 130, cfg);
        REQUIRE_FALSE(trace.truncated);
        REQUIRE(parsed.rows.size() == trace.t_index.size() + 1);
        for (std::size_t k = 0; k < trace.t_index.size(); ++k) {
            const auto& row = parsed.rows[k + 1];
            REQUIRE(std::stoul(row[1]) == trace.t_index[k]);
            REQUIRE(std::stod(row[3]) == Catch::Approx(trace.beta_realtime[k]).margin(1e-12));
            REQUIRE(std::stod(row[4]) == Catch::Approx(trace.beta_fullsample[k]).margin(1e-12));
            REQUIRE(std::stod(row[5]) == Catch::Approx(trace.benchmark[k]).margin(1e-12));
        }
    }

    SECTION("mc") {
        const auto out = dir / "mc.csv";
        const int rc = run_cli("mc --output " + out.string() +
                               " --reps 1 --n 60 --rho 1 --d0 1.25 --bandwidth-exps 0.65 --seed 9");
        REQUIRE(rc == 0);
        const auto parsed = parse_output(out);

        fracuc::McDesign design;
        design.n = {60};
        design.rho = {1.0};
        design.d0 = {1.25};
        design.replications = 1;
        design.bandwidth_exponents = {0.65};
        design.seed = 9;
        const auto rows = fracuc::run_study(design);
        REQUIRE(parsed.rows.size() == 2);
        REQUIRE(std::stod(parsed.rows[1][3]) == Catch::Approx(rows[0].mse_d_css).epsilon(1e-10));
        REQUIRE(std::stod(parsed.rows[1][5]) == Catch::Approx(rows[0].mse_x).epsilon(1e-10));
    }

    SECTION("bn") {
        const auto y = testutil::random_series(40, 3);
        std::ostringstream os;
        os << "t,value\n";
        for (std::size_t t = 0; t < y.size(); ++t)
            os << (t + 1) << "," << fracuc::format_double(y.values[t]) << "\n";
        const auto series_path = dir / "series.csv";
        write_file(series_path, os.str());

        const auto out = dir / "bn.csv";
        const int rc = run_cli("bn --input " + series_path.string() + " --output " + out.string() +
                               " --d 1.1 --phi 0.5 --sigma-eta2 1 --sigma-eps2 0.5");
        REQUIRE(rc == 0);
        const auto parsed = parse_output(out);

        const auto theta_eps =
            fracuc::truncate_ma(fracuc::lagpoly_invert(fracuc::LagPolynomial({0.5}), 1.1, 400));
        const auto agg = fracuc::aggregate_theta_u(theta_eps, {1.0, 0.5, 0.0});
        const auto u = fracuc::derive_reduced_innovations(y, 1.1, agg.theta_u);
        const auto bn = fracuc::bn_decompose(y, 1.1, agg.theta_u, agg.sigma_u2, u);
        for (std::size_t t = 0; t < y.size(); ++t) {
            const auto& row = parsed.rows[t + 1];
            REQUIRE(std::stod(row[2]) == Catch::Approx(bn.trend.values[t]).margin(1e-9));
            REQUIRE(std::stod(row[3]) == Catch::Approx(bn.cycle.values[t]).margin(1e-9));
            // split reconstructs the input
            REQUIRE(std::stod(row[2]) + std::stod(row[3]) ==
                    Catch::Approx(y.values[t]).margin(1e-8));
        }
    }

    SECTION("sir flags the policy trigger at the planted crossing") {
        // noise-free smooth path whose reproduction rate crosses 1.2 around
        // day 80
        const std::size_t days = 200;
        const double gamma = 0.05;
        std::vector<double> beta(days);
        std::size_t planted_cross = 0;
        for (std::size_t t = 0; t < days; ++t) {
            const double r_eff = 0.7 + 0.9 / (1.0 + std::exp((80.0 - static_cast<double>(t)) / 6.0));
            beta[t] = gamma * r_eff;
            if (planted_cross == 0 && r_eff > 1.2) planted_cross = t;
        }
        const auto planted = fracuc::simulate_sir(beta, 0.045, 0.005, 5e5, 1e8,
                                                  fracuc::Date{2020, 3, 1});
        const auto cross_input = dir / "trigger_cases.csv";
        write_file(cross_input, to_long_csv(planted));
        const auto out = dir / "trigger.csv";
        const int rc = run_cli("sir --input " + cross_input.string() + " --output " +
                               out.string() + " --seed 2 --starts 6");
        REQUIRE(rc == 0);
        const auto parsed = parse_output(out);
        std::size_t flagged = 0;
        bool found = false;
        for (std::size_t i = 1; i < parsed.rows.size(); ++i) {
            if (parsed.rows[i].size() >= 5 &&
                parsed.rows[i][4].find("trigger") != std::string::npos) {
                flagged = i - 1;
                found = true;
                break;
            }
        }
        REQUIRE(found);
        REQUIRE(flagged >= planted_cross - 6);
        REQUIRE(flagged <= planted_cross + 6);
    }

    SECTION("configuration file values are read and flags win") {
        const auto cfg_path = dir / "run.cfg";
        write_file(cfg_path, "seed=5\nstarts=4\n");
        const auto out_cfg = dir / "cfg.csv";
        const auto out_flag = dir / "flag.csv";
        int rc = run_cli("fit --config " + cfg_path.string() + " --input " + input.string() +
                         " --output " + out_cfg.string());
        REQUIRE(rc == 0);
        rc = run_cli("fit --input " + input.string() + " --output " + out_flag.string() +
                     " --seed 5 --starts 4");
        REQUIRE(rc == 0);
        auto strip_meta = [](const std::string& s) {
            std::string kept;
            std::stringstream ss(s);
            std::string line;
            while (std::getline(ss, line))
                if (line.empty() || line[0] != '#') kept += line + "\n";
            return kept;
        };
        REQUIRE(strip_meta(read_file(out_cfg)) == strip_meta(read_file(out_flag)));

        // a flag on the command line overrides the file (the metadata records
        // the effective value)
        const auto out_override = dir / "override.csv";
        rc = run_cli("fit --config " + cfg_path.string() + " --input " + input.string() +
                     " --output " + out_override.string() + " --seed 6");
        REQUIRE(rc == 0);
        REQUIRE(read_file(out_cfg).find("seed=5 ") != std::string::npos);
        REQUIRE(read_file(out_override).find("seed=6 ") != std::string::npos);

        // unknown keys are rejected
        const auto bad_cfg = dir / "bad.cfg";
        write_file(bad_cfg, "no_such_option=1\n");
        REQUIRE(run_cli("fit --config " + bad_cfg.string() + " --input " + input.string() +
                        " --output -") == 4);
    }

    SECTION("identical seeds give byte-identical outputs") {
        const auto out1 = dir / "rep1.csv";
        const auto out2 = dir / "rep2.csv";
        for (const auto& out : {out1, out2}) {
            const int rc = run_cli("fit --input " + input.string() + " --output " + out.string() +
                                   " --seed 5 --starts 4");
            REQUIRE(rc == 0);
        }
        REQUIRE(read_file(out1) == read_file(out2));
    }

    SECTION("exit codes") {
        REQUIRE(run_cli("fit --input /nonexistent.csv --output -") == 2);
        REQUIRE(run_cli("fit") == 4);
        REQUIRE(run_cli("fit --no-such-flag") == 4);

        const auto bad = dir / "bad.csv";
        write_file(bad,
                   "date,confirmed,recovered,deceased,population\n"
                   "2020-03-01,100,0,0,1000000\n"
                   "2020-03-03,120,0,0,1000000\n");
        const auto out = dir / "never.csv";
        REQUIRE(run_cli("fit --input " + bad.string() + " --output " + out.string()) == 2);
        REQUIRE_FALSE(fs::exists(out));  // failures leave no partial output
    }
}
