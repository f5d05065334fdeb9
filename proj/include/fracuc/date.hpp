#pragma once

// Minimal proleptic-Gregorian calendar helpers for daily time series.
// Day counts follow the civil-from-days algorithm of Howard Hinnant.

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fracuc {

struct Date {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    friend bool operator==(const Date& a, const Date& b) {
        return a.year == b.year && a.month == b.month && a.day == b.day;
    }
    friend bool operator!=(const Date& a, const Date& b) { return !(a == b); }
};

// Days since 1970-01-01.
inline std::int64_t days_from_civil(const Date& dt) {
    std::int64_t y = dt.year;
    const unsigned m = dt.month;
    const unsigned d = dt.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), m, d};
}

// 0 = Sunday ... 6 = Saturday.
inline int weekday_of(const Date& dt) {
    const std::int64_t z = days_from_civil(dt);
    return static_cast<int>(((z % 7) + 11) % 7);
}

inline Date add_days(const Date& dt, std::int64_t n) {
    return civil_from_days(days_from_civil(dt) + n);
}

inline std::string to_iso(const Date& dt) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", dt.year, dt.month, dt.day);
    return std::string(buf);
}

inline bool valid_date(const Date& dt) {
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > 31) return false;
    return civil_from_days(days_from_civil(dt)) == dt;
}

// ISO-8601 "YYYY-MM-DD".
inline Date parse_iso_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3)
        throw std::invalid_argument("invalid ISO date: " + s);
    Date dt{y, m, d};
    if (!valid_date(dt)) throw std::invalid_argument("invalid ISO date: " + s);
    return dt;
}

// "M/D/YY" as used by wide case-count layouts; two-digit years map to 20YY.
inline Date parse_mdy_date(const std::string& s) {
    unsigned m = 0, d = 0;
    int y = 0;
    if (std::sscanf(s.c_str(), "%u/%u/%d", &m, &d, &y) != 3)
        throw std::invalid_argument("invalid M/D/YY date: " + s);
    if (y < 100) y += 2000;
    Date dt{y, m, d};
    if (!valid_date(dt)) throw std::invalid_argument("invalid M/D/YY date: " + s);
    return dt;
}

}  // namespace fracuc
