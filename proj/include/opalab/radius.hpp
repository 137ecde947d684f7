#pragma once

#include <utility>
#include <vector>

#include "opalab/detail/roots.hpp"
#include "opalab/dynamics.hpp"
#include "opalab/errors.hpp"
#include "opalab/lagrange.hpp"
#include "opalab/pnorm.hpp"

namespace opalab {

/// Disk of radius r = 1/s_min around the origin free of approximant roots.
template <class Real = double>
struct ExclusionResult {
    Real p = Real(0);
    Real s_min = Real(0);
    Real r = Real(0);
};

/**
 * Smallest s for which the Pythagorean-inequality bound excludes the disk
 * of radius 1/s. For p >= 2 this is the root in (1, 2] of
 * (s-1)^p + s^p / (2^{p-1} - 1) = 1; for 1 < p < 2 the closed form
 * (2/p)^{1/p}. As p -> 2 from either side, s -> 1 and the excluded region
 * grows toward the full disk.
 */
template <class Real>
ExclusionResult<Real> exclusion_radius(const PNorm<Real>& pn) {
    const Real p = pn.p();
    ExclusionResult<Real> out;
    out.p = p;
    if (p < Real(2)) {
        out.s_min = pow_value(Real(2) / p, Real(1) / p);
    } else {
        const Real denom = pow_value(Real(2), p - Real(1)) - Real(1);
        auto fn = [&](const Real& s) {
            return pow_value(s - Real(1), p) + pow_value(s, p) / denom - Real(1);
        };
        out.s_min = detail::bisect(fn, Real(1), Real(2));
    }
    out.r = Real(1) / out.s_min;
    return out;
}

/**
 * The two distinct positive solutions of x^{p-1}(p t - x) = p - 1 for
 * t > 1, bracketed in (0, t) and (t, p t). At t = 1 the lower solution
 * coalesces onto t; below 1 the equation leaves the analyzed regime.
 */
template <class Real>
std::pair<Real, Real> xi_pair(const PNorm<Real>& pn, const Real& t) {
    if (pn.near_two()) throw UnsupportedExponent("xi_pair: requires p != 2");
    if (t < Real(1)) throw OutOfRange("xi_pair: requires t > 1");
    const Real p = pn.p();
    // product form x^{p-1} (x - p t) + (p-1): the naive difference of the two
    // x-power terms cancels catastrophically near x = p t for large p
    auto g = [&](const Real& x) {
        return pow_value(x, p - Real(1)) * (x - p * t) + (p - Real(1));
    };
    const Real gt = g(t);  // (p-1)(1 - t^p) < 0 strictly for t > 1
    if (!(gt < Real(0))) throw Degenerate("xi_pair: roots coalesce at t = 1");
    const Real lo = Real(1e-8) * t;
    const Real xi1 = detail::bisect(g, lo, t, g(lo), gt);
    const Real xi2 = detail::bisect(g, t, p * t, gt, g(p * t));
    return {xi1, xi2};
}

/// Critical multiplier: the unique t for which Phi takes equal values at
/// the two positive fixed-point abscissas.
template <class Real = double>
struct TauResult {
    Real p = Real(0);
    Real tau = Real(0);
    Real xi1 = Real(0);
    Real xi2 = Real(0);
    Real bracket_width = Real(0);
};

namespace detail {

/// Phi evaluated at a solution xi of x^{p-1}(p t - x) = p - 1, using the
/// relation to trade the factor (p t - xi) for (p-1)/xi^{p-1}:
///   Phi(xi) = (p-1) |xi - t|^{p-2} / xi^{p-1}.
/// The direct form is hopeless at the upper root for large p, where
/// p t - xi2 underflows below one ulp of xi2; this form is insensitive to
/// ulp-level error in xi.
template <class Real>
Real phi_at_fixed_point(const PNorm<Real>& pn, const Real& t, const Real& xi) {
    const Real p = pn.p();
    return (p - Real(1)) * pow_value(abs_value(xi - t), p - Real(2)) /
           pow_value(xi, p - Real(1));
}

/// G(t) = Phi_t(xi1) - Phi_t(xi2); root-finding target for the critical
/// multiplier. For p < 2 the comparison happens in log space, since
/// |xi - t|^{p-2} diverges as the roots approach t.
template <class Real>
Real tau_gap(const PNorm<Real>& pn, const Real& t) {
    const auto [xi1, xi2] = xi_pair(pn, t);
    const Real p = pn.p();
    if (p >= Real(2))
        return phi_at_fixed_point(pn, t, xi1) - phi_at_fixed_point(pn, t, xi2);
    auto log_phi = [&](const Real& xi) {
        return (p - Real(2)) * log_value(abs_value(xi - t)) - (p - Real(1)) * log_value(xi);
    };
    return log_phi(xi1) - log_phi(xi2);
}

}  // namespace detail

/**
 * Root-finds G(t) = Phi_t(xi1(t)) - Phi_t(xi2(t)) on (1 + 1e-6, 2) by
 * bisection; the root is unique, sits strictly inside (1, 2), and equals
 * the limit of the extremal values as the degree grows. The offset at the
 * left end avoids the root coalescence at t = 1.
 */
template <class Real>
TauResult<Real> solve_tau(const PNorm<Real>& pn) {
    if (pn.near_two()) throw UnsupportedExponent("solve_tau: requires p != 2");
    Real lo = Real(1) + Real(1e-6);
    Real hi = Real(2);
    Real glo = detail::tau_gap(pn, lo);
    Real ghi = detail::tau_gap(pn, hi);
    if ((glo < Real(0)) == (ghi < Real(0))) {
        std::vector<std::pair<double, double>> samples;
        for (int i = 0; i <= 16; ++i) {
            const Real t = lo + (hi - lo) * Real(i) / Real(16);
            samples.emplace_back(static_cast<double>(t), static_cast<double>(detail::tau_gap(pn, t)));
        }
        throw BracketFailure("solve_tau: no sign change of the fixed-point gap on (1, 2)", samples);
    }
    const int iters = std::numeric_limits<Real>::digits + 8;
    for (int i = 0; i < iters; ++i) {
        const Real mid = lo + (hi - lo) / Real(2);
        if (mid == lo || mid == hi) break;
        const Real gm = detail::tau_gap(pn, mid);
        if (gm == Real(0)) {
            lo = hi = mid;
            break;
        }
        if ((gm < Real(0)) == (glo < Real(0))) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    TauResult<Real> out;
    out.p = pn.p();
    out.tau = lo + (hi - lo) / Real(2);
    out.bracket_width = hi - lo;
    const auto [x1, x2] = xi_pair(pn, out.tau);
    out.xi1 = x1;
    out.xi2 = x2;
    return out;
}

/// Gaps tau_p - T_{d,p} for d = 2..d_max: positive and shrinking, since
/// the extremal values increase strictly toward tau.
template <class Real>
std::vector<Real> tau_vs_extremal_gaps(const PNorm<Real>& pn, int d_max,
                                       const SolverConfig<Real>& cfg = {}) {
    const TauResult<Real> tau = solve_tau(pn);
    const auto chain = extremal_chain(pn, d_max, cfg);
    std::vector<Real> gaps;
    gaps.reserve(chain.size());
    for (const auto& sol : chain) gaps.push_back(tau.tau - sol.t);
    return gaps;
}

/// Diagnostic margin Psi(p t) - Phi(xi1(t)). While positive, the first
/// step from (p t, 0) already clears the lower fixed point; it crosses
/// zero at the threshold multiplier discussed alongside tau and is
/// negative from there on. Not a solved quantity, only a sample.
template <class Real>
Real orbit_entry_margin(const PNorm<Real>& pn, const Real& t) {
    const PhiPsiParams<Real> prm(pn, t);
    const auto [xi1, xi2] = xi_pair(pn, t);
    (void)xi2;
    return psi(prm, pn.p() * t) - phi(prm, xi1);
}

}  // namespace opalab
