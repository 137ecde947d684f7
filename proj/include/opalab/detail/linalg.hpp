#pragma once

#include <cstddef>
#include <vector>

#include "opalab/errors.hpp"
#include "opalab/scalar.hpp"

namespace opalab::detail {

/// Gaussian elimination with partial pivoting for the small dense systems
/// that appear here (orthogonality conditions, Newton corrections; n is
/// the polynomial degree, never more than a few dozen).
template <class Real>
std::vector<Real> solve_dense(std::vector<std::vector<Real>> a, std::vector<Real> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        Real best = abs_value(a[col][col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const Real v = abs_value(a[r][col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == Real(0)) throw Error("solve_dense: singular matrix");
        if (piv != col) {
            a[piv].swap(a[col]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Real m = a[r][col] / a[col][col];
            if (m == Real(0)) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    std::vector<Real> x(n, Real(0));
    for (std::size_t i = n; i-- > 0;) {
        Real s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace opalab::detail
