#pragma once

#include <limits>
#include <utility>

#include "opalab/scalar.hpp"

namespace opalab::detail {

/// Bisection on [lo, hi] for a function whose endpoint values flo, fhi
/// have opposite signs (either may be exactly zero). Runs to (near)
/// machine width for the scalar type in use.
template <class Real, class F>
Real bisect(F&& f, Real lo, Real hi, Real flo, Real fhi) {
    if (flo == Real(0)) return lo;
    if (fhi == Real(0)) return hi;
    const int iters = std::numeric_limits<Real>::digits + 8;
    for (int i = 0; i < iters; ++i) {
        const Real mid = lo + (hi - lo) / Real(2);
        if (mid == lo || mid == hi) break;
        const Real fm = f(mid);
        if (fm == Real(0)) return mid;
        if ((fm < Real(0)) == (flo < Real(0))) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return lo + (hi - lo) / Real(2);
}

/// Convenience overload evaluating the endpoints.
template <class Real, class F>
Real bisect(F&& f, Real lo, Real hi) {
    const Real flo = f(lo);
    const Real fhi = f(hi);
    return bisect(std::forward<F>(f), lo, hi, flo, fhi);
}

/// Ternary search for the minimizer of a unimodal function on [lo, hi].
template <class Real, class F>
Real minimize_unimodal(F&& f, Real lo, Real hi) {
    const int iters = std::numeric_limits<Real>::digits + 8;
    for (int i = 0; i < iters; ++i) {
        const Real third = (hi - lo) / Real(3);
        if (third == Real(0)) break;
        const Real m1 = lo + third;
        const Real m2 = hi - third;
        if (f(m1) < f(m2))
            hi = m2;
        else
            lo = m1;
    }
    return lo + (hi - lo) / Real(2);
}

}  // namespace opalab::detail
