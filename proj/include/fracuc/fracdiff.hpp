#pragma once

// Fractional differencing coefficients and the truncated (type II)
// fractional difference / integration operators.
//
// The coefficient sequence of (1-L)^d is
//   pi_0(d) = 1,   pi_j(d) = ((j - d - 1) / j) * pi_{j-1}(d),
// and the truncated operator acting on a series that is zero at t <= 0 is
//   (D^d y)_t = sum_{i=0}^{t-1} pi_i(d) y_{t-i},  t = 1..n.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "series.hpp"

namespace fracuc {

struct FracCoeffs {
    double d = 0.0;
    std::vector<double> coeffs;  // pi_0 .. pi_m
};

inline FracCoeffs pi_coeffs(double d, std::size_t m) {
    if (!std::isfinite(d)) throw std::invalid_argument("pi_coeffs: d must be finite");
    FracCoeffs out;
    out.d = d;
    out.coeffs.resize(m + 1);
    out.coeffs[0] = 1.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double jd = static_cast<double>(j);
        out.coeffs[j] = ((jd - d - 1.0) / jd) * out.coeffs[j - 1];
    }
    return out;
}

namespace detail {

// out[t] = sum_{i=0}^{t-1} pi[i] * y[t-i], 1-based t.
inline std::vector<double> truncated_convolve(const std::vector<double>& pi,
                                              const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= t; ++i) acc += pi[i] * y[t - i];
        out[t] = acc;
    }
    return out;
}

}  // namespace detail

inline Series fracdiff(const Series& y, double d) {
    require_valid(y, "fracdiff");
    if (!std::isfinite(d)) throw std::invalid_argument("fracdiff: d must be finite");
    const auto pi = pi_coeffs(d, y.size() - 1);
    return Series(detail::truncated_convolve(pi.coeffs, y.values), y.origin_index);
}

inline Series fracint(const Series& e, double d) { return fracdiff(e, -d); }

// Weight of a unit shock j periods later for a process whose j-step response
// is pi_j(-d): impulse_response(d, h) = (pi_0(-d), ..., pi_h(-d)).
inline std::vector<double> impulse_response(double d, std::size_t horizon) {
    return pi_coeffs(-d, horizon).coeffs;
}

}  // namespace fracuc
