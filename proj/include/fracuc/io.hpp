#pragma once

// CSV ingestion for case-count data (a long per-day layout and a wide
// date-columns layout) plus small writing helpers.  Output files carry
// "# key=value" metadata lines; dates are always written ISO-8601.

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "sir.hpp"

namespace fracuc {

enum class ParseCode {
    malformed_header,
    malformed_field,
    date_gap,
    non_monotone,
    empty_input,
    missing_population,
};

struct parse_error : input_error {
    ParseCode code;
    std::size_t line;
    std::size_t column;
    parse_error(ParseCode c, std::size_t ln, std::size_t col, const std::string& what)
        : input_error("line " + std::to_string(ln) + " col " + std::to_string(col) + ": " + what),
          code(c), line(ln), column(col) {}
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        std::size_t b = 0;
        while (b < field.size() && field[b] == ' ') ++b;
        out.push_back(field.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_number(const std::string& s, std::size_t ln, std::size_t col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error(ParseCode::malformed_field, ln, col, "expected a number, got '" + s + "'");
    }
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace detail

// Long layout: header "date,confirmed,recovered,deceased,population", one row
// per day, cumulative counts, population constant.
inline CaseSeries parse_long(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw parse_error(ParseCode::empty_input, 1, 1, "empty file");
    const auto header = detail::split_csv_line(lines[0]);
    const std::vector<std::string> expected{"date", "confirmed", "recovered", "deceased",
                                            "population"};
    if (header.size() < 4)
        throw parse_error(ParseCode::malformed_header, 1, 1, "expected date,confirmed,recovered,deceased,population");
    for (std::size_t i = 0; i < 4; ++i)
        if (header[i] != expected[i])
            throw parse_error(ParseCode::malformed_header, 1, i + 1,
                              "expected column '" + expected[i] + "', got '" + header[i] + "'");
    const bool has_pop = header.size() >= 5 && header[4] == "population";
    if (header.size() >= 5 && !has_pop)
        throw parse_error(ParseCode::malformed_header, 1, 5, "fifth column must be 'population'");
    if (lines.size() == 1) throw parse_error(ParseCode::empty_input, 1, 1, "no data rows");

    CaseSeries cs;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto f = detail::split_csv_line(lines[r]);
        if (f.size() < (has_pop ? 5u : 4u))
            throw parse_error(ParseCode::malformed_field, r + 1, f.size() + 1, "missing fields");
        Date dt;
        try {
            dt = parse_iso_date(f[0]);
        } catch (const std::exception& e) {
            throw parse_error(ParseCode::malformed_field, r + 1, 1, e.what());
        }
        if (!cs.dates.empty() && days_from_civil(dt) != days_from_civil(cs.dates.back()) + 1)
            throw parse_error(ParseCode::date_gap, r + 1, 1, "date gap before " + to_iso(dt));
        const double c = detail::parse_number(f[1], r + 1, 2);
        const double rr = detail::parse_number(f[2], r + 1, 3);
        const double dd = detail::parse_number(f[3], r + 1, 4);
        if (!cs.confirmed.empty() &&
            (c < cs.confirmed.back() || rr < cs.recovered.back() || dd < cs.deceased.back()))
            throw parse_error(ParseCode::non_monotone, r + 1, 2,
                              "cumulative counts decrease on " + to_iso(dt));
        if (has_pop) {
            const double pop = detail::parse_number(f[4], r + 1, 5);
            if (cs.population == 0.0) cs.population = pop;
            else if (pop != cs.population)
                throw parse_error(ParseCode::malformed_field, r + 1, 5, "population changes mid-file");
        }
        cs.dates.push_back(dt);
        cs.confirmed.push_back(c);
        cs.recovered.push_back(rr);
        cs.deceased.push_back(dd);
    }
    if (!has_pop || cs.population == 0.0)
        throw config_error("parse_long: population column required");
    require_valid(cs, "parse_long");
    return cs;
}

// Wide layout: header "series,region,population,M/D/YY,M/D/YY,...".  Rows
// carry one of series in {confirmed, recovered, deceased}; sub-region rows
// of the same series are summed, population is summed over the confirmed
// rows.
inline CaseSeries parse_jhu_wide(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw parse_error(ParseCode::empty_input, 1, 1, "empty file");
    const auto header = detail::split_csv_line(lines[0]);
    if (header.size() < 4 || header[0] != "series" || header[1] != "region" ||
        header[2] != "population")
        throw parse_error(ParseCode::malformed_header, 1, 1,
                          "expected series,region,population,<dates...>");

    std::vector<Date> dates;
    for (std::size_t c = 3; c < header.size(); ++c) {
        Date dt;
        try {
            dt = parse_mdy_date(header[c]);
        } catch (const std::exception& e) {
            throw parse_error(ParseCode::malformed_header, 1, c + 1, e.what());
        }
        if (!dates.empty() && days_from_civil(dt) != days_from_civil(dates.back()) + 1)
            throw parse_error(ParseCode::date_gap, 1, c + 1, "date gap before " + to_iso(dt));
        dates.push_back(dt);
    }
    if (dates.empty()) throw parse_error(ParseCode::malformed_header, 1, 4, "no date columns");
    if (lines.size() == 1) throw parse_error(ParseCode::empty_input, 1, 1, "no data rows");

    const std::size_t n = dates.size();
    std::map<std::string, std::vector<double>> sums;
    sums["confirmed"] = std::vector<double>(n, 0.0);
    sums["recovered"] = std::vector<double>(n, 0.0);
    sums["deceased"] = std::vector<double>(n, 0.0);
    double population = 0.0;
    std::map<std::string, int> row_count;

    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto f = detail::split_csv_line(lines[r]);
        if (f.size() != 3 + n)
            throw parse_error(ParseCode::malformed_field, r + 1, f.size() + 1,
                              "expected " + std::to_string(3 + n) + " fields");
        const std::string& kind = f[0];
        if (sums.find(kind) == sums.end())
            throw parse_error(ParseCode::malformed_field, r + 1, 1,
                              "unknown series '" + kind + "'");
        if (kind == "confirmed") population += detail::parse_number(f[2], r + 1, 3);
        auto& acc = sums[kind];
        double prev = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double v = detail::parse_number(f[3 + c], r + 1, 4 + c);
            if (prev >= 0.0 && v < prev)
                throw parse_error(ParseCode::non_monotone, r + 1, 4 + c,
                                  "cumulative counts decrease on " + to_iso(dates[c]));
            prev = v;
            acc[c] += v;
        }
        ++row_count[kind];
    }
    for (const char* kind : {"confirmed", "recovered", "deceased"})
        if (row_count[kind] == 0)
            throw parse_error(ParseCode::malformed_header, 1, 1,
                              std::string("no '") + kind + "' rows present");
    if (population <= 0.0)
        throw config_error("parse_jhu_wide: population missing on confirmed rows");

    CaseSeries cs;
    cs.dates = std::move(dates);
    cs.confirmed = std::move(sums["confirmed"]);
    cs.recovered = std::move(sums["recovered"]);
    cs.deceased = std::move(sums["deceased"]);
    cs.population = population;
    require_valid(cs, "parse_jhu_wide");
    return cs;
}

// Sniff the layout from the header line.
inline CaseSeries parse_cases(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::string first;
    do {
        if (!std::getline(in, first)) throw parse_error(ParseCode::empty_input, 1, 1, "empty file");
    } while (!first.empty() && first[0] == '#');
    in.close();
    if (first.rfind("series,", 0) == 0) return parse_jhu_wide(path);
    return parse_long(path);
}

// ---- output helpers ---------------------------------------------------------

inline std::uint64_t fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    for (int prec = 12; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return std::string(buf);
}

}  // namespace fracuc
