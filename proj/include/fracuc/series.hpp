#pragma once

// Time series container. Values are stored 0-based; the surrounding
// formulas treat the first entry as time t = 1 and indices at or before
// t = 0 as zero (fractional operators are truncated convolutions).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "errors.hpp"

namespace fracuc {

struct Series {
    std::vector<double> values;
    long origin_index = 1;  // time index of values.front() in the caller's clock

    Series() = default;
    explicit Series(std::vector<double> v, long origin = 1)
        : values(std::move(v)), origin_index(origin) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

inline void require_valid(const Series& s, const char* who) {
    if (s.values.empty())
        throw std::invalid_argument(std::string(who) + ": series is empty");
    for (double v : s.values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(who) + ": series has non-finite values");
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Pairwise (cascade) summation; keeps Monte Carlo aggregates independent of
// accumulation chunking.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

}  // namespace fracuc
