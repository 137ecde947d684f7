#pragma once

#include "opalab/pnorm.hpp"
#include "opalab/polynomial.hpp"
#include "opalab/scalar.hpp"

namespace opalab {

/// Sum |a_k|^p (the p-th power of the norm; avoids the final root when
/// callers only need the power).
template <class Real>
Real lp_norm_pow(const Polynomial<Real>& f, const PNorm<Real>& pn) {
    Real s(0);
    for (const Real& a : f.coeffs()) {
        if (a != Real(0)) s += pow_value(abs_value(a), pn.p());
    }
    return s;
}

/// Coefficient norm (sum |a_k|^p)^(1/p); zero iff every coefficient is zero.
template <class Real>
Real lp_norm(const Polynomial<Real>& f, const PNorm<Real>& pn) {
    const Real s = lp_norm_pow(f, pn);
    if (s == Real(0)) return Real(0);
    return pow_value(s, Real(1) / pn.p());
}

/// Semi-inner product sum_k a_k^<p-1> b_k. The shorter coefficient list is
/// implicitly zero-padded; only the overlapping range contributes.
template <class Real>
Real semi_inner(const Polynomial<Real>& f, const Polynomial<Real>& g, const PNorm<Real>& pn) {
    const int n = min_value(f.degree(), g.degree());
    const Real s = pn.p() - Real(1);
    Real acc(0);
    for (int k = 0; k <= n; ++k) {
        const Real a = f.coeff(k);
        const Real b = g.coeff(k);
        if (a == Real(0) || b == Real(0)) continue;
        acc += signed_power(a, s) * b;
    }
    return acc;
}

/// Birkhoff-James orthogonality test f _|_p g via the vanishing of the
/// semi-inner product. The tolerance is relative: residuals are compared
/// against ||f||^(p-1) ||g||, since absolute values are meaningless across
/// coefficient scales.
template <class Real>
bool is_bj_orthogonal(const Polynomial<Real>& f, const Polynomial<Real>& g,
                      const PNorm<Real>& pn, const Real& tol) {
    if (!(tol > Real(0))) throw std::domain_error("is_bj_orthogonal: tolerance must be positive");
    const Real lhs = abs_value(semi_inner(f, g, pn));
    const Real scale = pow_value(lp_norm(f, pn), pn.p() - Real(1)) * lp_norm(g, pn);
    return lhs <= tol * max_value(Real(1), scale);
}

}  // namespace opalab
