#pragma once

// Residual diagnostics: sample autocorrelations and the Ljung-Box
// portmanteau statistic.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracuc {

inline std::vector<double> sample_acf(const std::vector<double>& x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("sample_acf: need n >= 2");
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag && k < n; ++k) {
        double ck = 0.0;
        for (std::size_t t = k; t < n; ++t) ck += (x[t] - m) * (x[t - k] - m);
        rho[k] = ck / c0;
    }
    return rho;
}

// Q = n (n + 2) sum_{k=1}^K rho_k^2 / (n - k); approximately chi-square(K)
// under serial independence.
inline double ljung_box(const std::vector<double>& x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n <= max_lag) throw std::invalid_argument("ljung_box: need n > max_lag");
    const auto rho = sample_acf(x, max_lag);
    double q = 0.0;
    for (std::size_t k = 1; k <= max_lag; ++k)
        q += rho[k] * rho[k] / static_cast<double>(n - k);
    return static_cast<double>(n) * (static_cast<double>(n) + 2.0) * q;
}

inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson_correlation: bad inputs");
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace fracuc
