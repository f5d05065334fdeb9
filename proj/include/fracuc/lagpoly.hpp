#pragma once

// Autoregressive polynomials in the fractional lag operator
//   L_d = 1 - (1-L)^d,
// which acts on a truncated (type II) series as
//   (L_d y)_t = -sum_{j=1}^{t-1} pi_j(d) y_{t-j}.
// A polynomial phi(z) = 1 - phi_1 z - ... - phi_p z^p is stable when it has
// no root inside the image C_d of the closed unit disk under
//   z -> 1 - (1-z)^d.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fracdiff.hpp"
#include "series.hpp"

namespace fracuc {

struct LagPolynomial {
    std::vector<double> coeffs;  // phi_1 .. phi_p

    LagPolynomial() = default;
    explicit LagPolynomial(std::vector<double> phi) : coeffs(std::move(phi)) {}

    std::size_t order() const { return coeffs.size(); }

    std::complex<double> eval(std::complex<double> z) const {
        std::complex<double> acc(1.0, 0.0);
        std::complex<double> zp(1.0, 0.0);
        for (double c : coeffs) {
            zp *= z;
            acc -= c * zp;
        }
        return acc;
    }
};

namespace detail {

// One application of L_d given precomputed pi(d).
inline std::vector<double> apply_frac_lag(const std::vector<double>& pi,
                                          const std::vector<double>& z) {
    const std::size_t n = z.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= t; ++j) acc -= pi[j] * z[t - j];
        out[t] = acc;
    }
    return out;
}

}  // namespace detail

// phi(L_d) y with powers of L_d obtained by repeated application.
inline Series lagpoly_apply(const LagPolynomial& phi, double d, const Series& y) {
    require_valid(y, "lagpoly_apply");
    const std::size_t n = y.size();
    std::vector<double> out = y.values;
    if (phi.order() == 0) return Series(std::move(out), y.origin_index);

    const auto pi = pi_coeffs(d, n == 0 ? 0 : n - 1);
    std::vector<double> power = y.values;
    for (std::size_t k = 0; k < phi.order(); ++k) {
        power = detail::apply_frac_lag(pi.coeffs, power);
        const double c = phi.coeffs[k];
        for (std::size_t t = 0; t < n; ++t) out[t] -= c * power[t];
    }
    return Series(std::move(out), y.origin_index);
}

// Numerical stability test.  The boundary of the region C_d is contained in
// the image of the unit circle under z -> 1 - (1-z)^d, so the number of
// roots of phi inside C_d equals the winding number of phi along that image
// curve around the origin (argument principle applied to phi composed with
// the disk map).  A nonzero winding count, or a boundary / interior-grid
// value of |phi| at or below 1e-6, is reported as unstable; the grid scan
// uses winding-number membership so self-intersecting boundary curves are
// handled.
inline bool stability_check(const LagPolynomial& phi, double d,
                            std::size_t samples = 1000) {
    if (samples < 360)
        throw std::invalid_argument("stability_check: samples must be >= 360");
    if (phi.order() == 0) return true;
    if (!std::isfinite(d) || d <= 0.0)
        throw std::invalid_argument("stability_check: d must be positive");

    const double tol = 1e-6;
    const double two_pi = 6.283185307179586476925286766559;

    std::vector<double> bx(samples), by(samples);
    double min_abs = std::numeric_limits<double>::infinity();
    double xlo = 1.0, xhi = 1.0, ylo = 0.0, yhi = 0.0;
    double arg_total = 0.0;
    double prev_arg = 0.0;
    for (std::size_t k = 0; k <= samples; ++k) {
        const double th = two_pi * static_cast<double>(k % samples) / static_cast<double>(samples);
        const std::complex<double> z(std::cos(th), std::sin(th));
        const std::complex<double> w = 1.0 - std::pow(1.0 - z, d);
        const std::complex<double> pw = phi.eval(w);
        min_abs = std::min(min_abs, std::abs(pw));
        if (min_abs <= tol) return false;
        const double arg = std::arg(pw);
        if (k > 0) {
            double inc = arg - prev_arg;
            while (inc > M_PI) inc -= two_pi;
            while (inc < -M_PI) inc += two_pi;
            arg_total += inc;
        }
        prev_arg = arg;
        if (k < samples) {
            bx[k] = w.real();
            by[k] = w.imag();
            xlo = std::min(xlo, bx[k]);
            xhi = std::max(xhi, bx[k]);
            ylo = std::min(ylo, by[k]);
            yhi = std::max(yhi, by[k]);
        }
    }
    if (std::lround(arg_total / two_pi) != 0) return false;  // root(s) enclosed

    const std::size_t grid = 101;
    const double dx = (xhi - xlo) / static_cast<double>(grid - 1);
    const double dy = (yhi - ylo) / static_cast<double>(grid - 1);
    for (std::size_t iy = 0; iy < grid; ++iy) {
        const double py = ylo + dy * static_cast<double>(iy);
        for (std::size_t ix = 0; ix < grid; ++ix) {
            const double px = xlo + dx * static_cast<double>(ix);
            int crossings = 0;
            bool on_curve = false;
            for (std::size_t k = 0; k < samples; ++k) {
                const std::size_t k2 = (k + 1 == samples) ? 0 : k + 1;
                const double y1 = by[k] - py, y2 = by[k2] - py;
                if ((y1 < 0.0) != (y2 < 0.0)) {
                    const double x1 = bx[k] - px, x2 = bx[k2] - px;
                    const double xc = x1 + (x2 - x1) * (-y1) / (y2 - y1);
                    if (std::abs(xc) < 1e-12) { on_curve = true; break; }
                    if (xc > 0.0) crossings += (y2 > y1) ? 1 : -1;
                }
            }
            if (on_curve || crossings != 0) {
                min_abs = std::min(min_abs, std::abs(phi.eval({px, py})));
                if (min_abs <= tol) return false;
            }
        }
    }
    return min_abs > tol;
}

// Power-series coefficients of (1 - z) / phi(z): the moving-average weights
// of the differenced cycle in the L_d algebra.  theta[0] = 1.
inline std::vector<double> lagpoly_invert(const LagPolynomial& phi, double d,
                                          std::size_t m) {
    if (phi.order() > 0 && !stability_check(phi, d))
        throw std::domain_error("lagpoly_invert: polynomial is unstable for this d");
    std::vector<double> theta(m + 1, 0.0);
    theta[0] = 1.0;
    const std::size_t p = phi.order();
    for (std::size_t j = 1; j <= m; ++j) {
        double acc = (j == 1) ? -1.0 : 0.0;  // numerator 1 - z
        const std::size_t kmax = std::min(j, p);
        for (std::size_t k = 1; k <= kmax; ++k) acc += phi.coeffs[k - 1] * theta[j - k];
        theta[j] = acc;
    }
    return theta;
}

}  // namespace fracuc
