#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "opalab/scalar.hpp"

namespace opalab::detail {

struct SimplexOptions {
    int max_iter = 4000;
    double xtol = 1e-9;   // simplex diameter
    double ftol = 1e-12;  // value spread
};

/// Nelder-Mead minimization. Derivative-free; used where the objective is
/// itself the output of an inner solve and analytic gradients are not
/// worth the bookkeeping.
template <class Real, class F>
std::pair<std::vector<Real>, Real> minimize_simplex(F&& f, const std::vector<Real>& x0,
                                                    const Real& step, SimplexOptions opts = {}) {
    const std::size_t n = x0.size();
    std::vector<std::vector<Real>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<Real> vals(n + 1, Real(0));
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<Real>> p2;
        std::vector<Real> v2;
        for (std::size_t i : idx) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    for (int it = 0; it < opts.max_iter; ++it) {
        order();
        Real diam(0);
        for (std::size_t i = 0; i < n; ++i) diam = max_value(diam, abs_value(pts[n][i] - pts[0][i]));
        if (diam < Real(opts.xtol) && abs_value(vals[n] - vals[0]) < Real(opts.ftol)) break;

        std::vector<Real> centroid(n, Real(0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (Real& c : centroid) c /= Real(static_cast<double>(n));

        auto blend = [&](const Real& coeff) {
            std::vector<Real> x(n, Real(0));
            for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + coeff * (pts[n][j] - centroid[j]);
            return x;
        };

        std::vector<Real> xr = blend(Real(-1));
        const Real fr = f(xr);
        if (fr < vals[0]) {
            std::vector<Real> xe = blend(Real(-2));
            const Real fe = f(xe);
            if (fe < fr) {
                pts[n] = std::move(xe);
                vals[n] = fe;
            } else {
                pts[n] = std::move(xr);
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = std::move(xr);
            vals[n] = fr;
        } else {
            std::vector<Real> xc = blend(fr < vals[n] ? Real(-0.5) : Real(0.5));
            const Real fc = f(xc);
            if (fc < min_value(fr, vals[n])) {
                pts[n] = std::move(xc);
                vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {  // shrink toward best
                    for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[0][j] + (pts[i][j] - pts[0][j]) / Real(2);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], vals[0]};
}

}  // namespace opalab::detail
