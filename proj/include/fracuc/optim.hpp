#pragma once

// Nelder-Mead simplex search over a clamped box, with shrink-restarts once
// the simplex stagnates.  Objectives may return +inf for infeasible points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace fracuc {

struct NelderMeadOptions {
    double tol = 1e-8;        // absolute spread of objective values at convergence
    std::size_t max_evals = 600;
    double init_step = 0.25;
    int restarts = 2;         // shrink-restarts around the incumbent
    std::vector<double> lower;  // optional box; empty = unbounded
    std::vector<double> upper;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fval = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;  // simplex spread fell below tol before the eval cap
};

namespace detail {

inline void clamp_point(std::vector<double>& x, const NelderMeadOptions& opt) {
    if (opt.lower.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::min(opt.upper[i], std::max(opt.lower[i], x[i]));
}

}  // namespace detail

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt) {
    const std::size_t dim = x0.size();
    NelderMeadResult result;
    result.x = x0;

    auto eval = [&](std::vector<double>& x) {
        detail::clamp_point(x, opt);
        ++result.evals;
        const double fx = f(x);
        return std::isfinite(fx) ? fx : std::numeric_limits<double>::infinity();
    };

    double step = opt.init_step;
    std::vector<std::vector<double>> pts(dim + 1);
    std::vector<double> fv(dim + 1);

    for (int round = 0; round <= opt.restarts; ++round) {
        pts[0] = result.x.empty() ? x0 : result.x;
        fv[0] = eval(pts[0]);
        for (std::size_t i = 0; i < dim; ++i) {
            pts[i + 1] = pts[0];
            pts[i + 1][i] += step;
            fv[i + 1] = eval(pts[i + 1]);
        }

        bool spread_ok = false;
        while (result.evals < opt.max_evals) {
            std::vector<std::size_t> ord(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) ord[i] = i;
            std::sort(ord.begin(), ord.end(),
                      [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t best = ord[0], worst = ord[dim], second = ord[dim - 1];

            if (std::isfinite(fv[best]) && std::isfinite(fv[worst]) &&
                fv[worst] - fv[best] <= opt.tol) {
                spread_ok = true;
                break;
            }

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t i = 0; i <= dim; ++i) {
                if (i == worst) continue;
                for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[i][k];
            }
            for (std::size_t k = 0; k < dim; ++k) centroid[k] /= static_cast<double>(dim);

            auto blend = [&](double alpha) {
                std::vector<double> x(dim);
                for (std::size_t k = 0; k < dim; ++k)
                    x[k] = centroid[k] + alpha * (pts[worst][k] - centroid[k]);
                return x;
            };

            std::vector<double> xr = blend(-1.0);
            const double fr = eval(xr);
            if (fr < fv[best]) {
                std::vector<double> xe = blend(-2.0);
                const double fe = eval(xe);
                if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
                else { pts[worst] = xr; fv[worst] = fr; }
            } else if (fr < fv[second]) {
                pts[worst] = xr;
                fv[worst] = fr;
            } else {
                const bool outside = fr < fv[worst];
                std::vector<double> xc = blend(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < std::min(fr, fv[worst])) {
                    pts[worst] = xc;
                    fv[worst] = fc;
                } else {
                    // shrink toward the best vertex
                    for (std::size_t i = 0; i <= dim; ++i) {
                        if (i == best) continue;
                        for (std::size_t k = 0; k < dim; ++k)
                            pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                        fv[i] = eval(pts[i]);
                    }
                }
            }
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i <= dim; ++i)
            if (fv[i] < fv[best]) best = i;
        if (fv[best] < result.fval) {
            result.fval = fv[best];
            result.x = pts[best];
        }
        result.converged = spread_ok;
        if (result.evals >= opt.max_evals) break;
        step *= 0.25;
    }
    return result;
}

}  // namespace fracuc
