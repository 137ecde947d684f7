#pragma once

#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "opalab/config.hpp"
#include "opalab/detail/linalg.hpp"
#include "opalab/detail/roots.hpp"
#include "opalab/errors.hpp"
#include "opalab/norms.hpp"
#include "opalab/pnorm.hpp"
#include "opalab/polynomial.hpp"
#include "opalab/scalar.hpp"

namespace opalab {

/// h(t) = ||(1 - t z) f(z)||_p^p expanded in coefficients:
/// |a_0|^p + sum_{k=1}^d |a_k - t a_{k-1}|^p + |t|^p |a_d|^p.
template <class Real>
Real h_value(const Polynomial<Real>& f, const PNorm<Real>& pn, const Real& t) {
    if (f.is_zero()) throw std::domain_error("h_value: zero polynomial");
    const auto& a = f.coeffs();
    const int d = f.degree();
    const Real p = pn.p();
    Real s = a[0] == Real(0) ? Real(0) : pow_value(abs_value(a[0]), p);
    for (int k = 1; k <= d; ++k) {
        const Real u = a[static_cast<std::size_t>(k)] - t * a[static_cast<std::size_t>(k - 1)];
        if (u != Real(0)) s += pow_value(abs_value(u), p);
    }
    const Real tail = t * a[static_cast<std::size_t>(d)];
    if (tail != Real(0)) s += pow_value(abs_value(tail), p);
    return s;
}

/// h'(t) = -sum_k p (a_k - t a_{k-1})^<p-1> a_{k-1} + p t^<p-1> |a_d|^p.
template <class Real>
Real h_prime(const Polynomial<Real>& f, const PNorm<Real>& pn, const Real& t) {
    if (f.is_zero()) throw std::domain_error("h_prime: zero polynomial");
    const auto& a = f.coeffs();
    const int d = f.degree();
    const Real p = pn.p();
    const Real s = p - Real(1);
    Real acc(0);
    for (int k = 1; k <= d; ++k) {
        const Real prev = a[static_cast<std::size_t>(k - 1)];
        if (prev == Real(0)) continue;
        acc -= p * signed_power(a[static_cast<std::size_t>(k)] - t * prev, s) * prev;
    }
    const Real ad = a[static_cast<std::size_t>(d)];
    if (ad != Real(0)) acc += p * signed_power(t, s) * pow_value(abs_value(ad), p);
    return acc;
}

/// L1 mass of the terms of h'(t); residual stopping is relative to this,
/// which tracks the coefficient scale of f far better than any fixed bound.
template <class Real>
Real h_prime_scale(const Polynomial<Real>& f, const PNorm<Real>& pn, const Real& t) {
    const auto& a = f.coeffs();
    const int d = f.degree();
    const Real p = pn.p();
    const Real s = p - Real(1);
    Real acc(0);
    for (int k = 1; k <= d; ++k) {
        const Real prev = a[static_cast<std::size_t>(k - 1)];
        if (prev == Real(0)) continue;
        const Real u = a[static_cast<std::size_t>(k)] - t * prev;
        if (u == Real(0)) continue;
        acc += p * pow_value(abs_value(u), s) * abs_value(prev);
    }
    const Real ad = a[static_cast<std::size_t>(d)];
    if (ad != Real(0) && t != Real(0))
        acc += p * pow_value(abs_value(t), s) * pow_value(abs_value(ad), p);
    return acc;
}

/**
 * Minimizer of h(t) = ||(1 - t z) f||_p^p. h is convex, so h' is
 * nondecreasing and the root is unique. Strategy: bracket in
 * [cfg.bracket_lo, cfg.bracket_hi], bisect to width 1e-4, then Newton with
 * a finite-difference second derivative. Newton steps that leave the
 * bracket or fail to shrink |h'| fall back to bisection, which guarantees
 * convergence also for 1 < p < 2 where h'' can blow up.
 */
template <class Real>
Real linear_opa_t(const Polynomial<Real>& f, const PNorm<Real>& pn,
                  const SolverConfig<Real>& cfg = {}) {
    if (f.coeff(0) == Real(0))
        throw ZeroAtOrigin("linear_opa_t: f(0) = 0, the optimal approximant is identically zero");

    Real lo = cfg.bracket_lo;
    Real hi = cfg.bracket_hi;
    Real flo = h_prime(f, pn, lo);
    Real fhi = h_prime(f, pn, hi);
    if (flo == Real(0)) return lo;
    if (fhi == Real(0)) return hi;
    if ((flo < Real(0)) == (fhi < Real(0))) {
        std::vector<std::pair<double, double>> samples;
        for (int i = 0; i <= 8; ++i) {
            const Real x = lo + (hi - lo) * Real(i) / Real(8);
            samples.emplace_back(static_cast<double>(x), static_cast<double>(h_prime(f, pn, x)));
        }
        throw BracketFailure("linear_opa_t: no sign change of h' on the bracket", samples);
    }

    while (hi - lo > Real(1e-4)) {
        const Real mid = lo + (hi - lo) / Real(2);
        const Real fm = h_prime(f, pn, mid);
        if (fm == Real(0)) return mid;
        if ((fm < Real(0)) == (flo < Real(0))) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }

    const Real eps = std::numeric_limits<Real>::epsilon();
    Real t = lo + (hi - lo) / Real(2);
    Real ft = h_prime(f, pn, t);
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (ft == Real(0)) break;
        if ((ft < Real(0)) == (flo < Real(0))) {
            lo = t;
            flo = ft;
        } else {
            hi = t;
            fhi = ft;
        }
        const Real width_tol = max_value(Real(8) * eps, Real(1e-13)) * max_value(Real(1), abs_value(t));
        if (hi - lo <= width_tol) break;

        Real tn = lo + (hi - lo) / Real(2);  // default: bisection step
        const Real dt = Real(1e-7) * (Real(1) + abs_value(t));
        const Real second = (h_prime(f, pn, t + dt) - h_prime(f, pn, t - dt)) / (Real(2) * dt);
        if (second > Real(0) && is_finite_value(second)) {
            const Real cand = t - ft / second;
            if (cand > lo && cand < hi) {
                const Real fc = h_prime(f, pn, cand);
                if (abs_value(fc) < abs_value(ft)) tn = cand;
            }
        }
        t = tn;
        ft = h_prime(f, pn, t);
    }
    return t;
}

/// Result of the optimal linear approximant p_{1,f} = c (1 - t z).
template <class Real = double>
struct LinearOpaResult {
    Real t = Real(0);              // minimizer of h
    std::optional<Real> zero;      // 1/t, absent when t = 0
    Real c = Real(0);              // leading constant of the approximant
    Real j1_norm = Real(0);        // ||(1 - t z) f||_p
    Real residual = Real(0);       // |h'(t)| at the solution
    Real residual_scale = Real(1); // term mass of h'; compare residual/residual_scale
};

/**
 * Solves the linear approximation problem for f with f(0) != 0 and
 * assembles c from the norm of the normalized co-projection
 * J_1 = (1 - t z) f / f(0):  c = (1/f(0)) / (1 + (||J_1||_p^p - 1)^(p'-1)).
 * ||J_1||_p >= |J_1(0)| = 1, so the inner power is of a nonnegative base.
 */
template <class Real>
LinearOpaResult<Real> solve_linear_opa(const Polynomial<Real>& f, const PNorm<Real>& pn,
                                       const SolverConfig<Real>& cfg = {}) {
    LinearOpaResult<Real> out;
    out.t = linear_opa_t(f, pn, cfg);
    if (abs_value(out.t) > Real(1e-13)) out.zero = Real(1) / out.t;

    const Real a0 = f.coeff(0);
    const Polynomial<Real> factor({Real(1), -out.t});
    const Polynomial<Real> j1 = factor * f;
    out.j1_norm = lp_norm(j1, pn);

    const Polynomial<Real> j1n = (Real(1) / a0) * j1;
    Real excess = lp_norm_pow(j1n, pn) - Real(1);
    if (excess < Real(0)) excess = Real(0);  // guard rounding; the exact value is >= 0
    const Real cp = pn.conj() - Real(1);
    out.c = (Real(1) / a0) / (Real(1) + pow_value(excess, cp));

    out.residual = abs_value(h_prime(f, pn, out.t));
    out.residual_scale = max_value(Real(1), h_prime_scale(f, pn, out.t));
    return out;
}

/// Degree-n optimal polynomial approximant of 1/f.
template <class Real = double>
struct OpaResult {
    Polynomial<Real> q;                 // the approximant
    Real residual_norm = Real(0);       // ||1 - q f||_p
    std::vector<Real> orth_residuals;   // semi_inner(1 - q f, z^k f), k = 0..n
    Real orth_scale = Real(1);          // relative scale for the residuals
    std::vector<Real> zeros;            // real roots of q located in [-10, 10]
};

namespace detail {

/// Real roots of q found by a sign-change scan over [-10, 10] followed by
/// bisection. Complex roots are out of scope for real coefficient storage.
template <class Real>
std::vector<Real> scan_real_roots(const Polynomial<Real>& q) {
    std::vector<Real> roots;
    const int cells = 4000;
    const Real lo(-10), hi(10);
    Real x0 = lo;
    Real f0 = q(x0);
    for (int i = 1; i <= cells; ++i) {
        const Real x1 = lo + (hi - lo) * Real(i) / Real(cells);
        const Real f1 = q(x1);
        if (f0 == Real(0)) {
            roots.push_back(x0);
        } else if (f1 != Real(0) && (f0 < Real(0)) != (f1 < Real(0))) {
            roots.push_back(bisect([&](const Real& x) { return q(x); }, x0, x1, f0, f1));
        }
        x0 = x1;
        f0 = f1;
    }
    if (f0 == Real(0)) roots.push_back(x0);
    std::vector<Real> uniq;
    for (const Real& r : roots) {
        bool dup = false;
        for (const Real& u : uniq)
            if (abs_value(u - r) < Real(1e-9) * (Real(1) + abs_value(u))) dup = true;
        if (!dup) uniq.push_back(r);
    }
    return uniq;
}

/// Weighted Gram matrix G[k][j] = sum_m w_m f_{m-k} f_{m-j}.
template <class Real>
std::vector<std::vector<Real>> weighted_gram(const Polynomial<Real>& f, int n,
                                             const std::vector<Real>& w) {
    const int rows = n + 1;
    std::vector<std::vector<Real>> g(static_cast<std::size_t>(rows),
                                     std::vector<Real>(static_cast<std::size_t>(rows), Real(0)));
    const int m_max = static_cast<int>(w.size()) - 1;
    for (int k = 0; k < rows; ++k) {
        for (int j = k; j < rows; ++j) {
            Real s(0);
            for (int m = 0; m <= m_max; ++m) {
                const Real wk = w[static_cast<std::size_t>(m)];
                if (wk == Real(0)) continue;
                s += wk * f.coeff(m - k) * f.coeff(m - j);
            }
            g[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = s;
            g[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = s;
        }
    }
    return g;
}

}  // namespace detail

/**
 * Degree-n approximant by minimizing the smooth convex objective
 * F(q) = ||1 - q f||_p^p. A Euclidean (p = 2) projection seeds the
 * iteration; a few gradient-descent steps with backtracking move into the
 * basin, and damped Newton on the stationarity system
 * semi_inner(1 - q f, z^k f) = 0, k = 0..n polishes to tolerance. For
 * p < 2 the Newton weights |r_m|^(p-2) are floored at 1e-14 to avoid
 * blow-ups where a residual coefficient vanishes.
 */
template <class Real>
OpaResult<Real> solve_opa(const Polynomial<Real>& f, const PNorm<Real>& pn, int n,
                          const SolverConfig<Real>& cfg = {}) {
    if (n < 0) throw std::domain_error("solve_opa: negative degree");
    if (f.coeff(0) == Real(0))
        throw ZeroAtOrigin("solve_opa: f(0) = 0, the optimal approximant is identically zero");

    const Real p = pn.p();
    const Real one(1);
    const Polynomial<Real> unit = Polynomial<Real>::constant(one);
    const int m_len = f.degree() + n + 1;

    auto residual_poly = [&](const std::vector<Real>& qc) {
        return unit - Polynomial<Real>(qc) * f;
    };
    auto orth_residuals = [&](const Polynomial<Real>& r) {
        std::vector<Real> out(static_cast<std::size_t>(n + 1), Real(0));
        for (int k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = semi_inner(r, f.shifted(k), pn);
        return out;
    };
    auto objective = [&](const std::vector<Real>& qc) { return lp_norm_pow(residual_poly(qc), pn); };

    // Euclidean seed: normal equations of min ||1 - q f||_2.
    std::vector<Real> q;
    {
        std::vector<Real> w(static_cast<std::size_t>(m_len), Real(1));
        auto gram = detail::weighted_gram(f, n, w);
        std::vector<Real> rhs(static_cast<std::size_t>(n + 1), Real(0));
        rhs[0] = f.coeff(0);
        q = detail::solve_dense(std::move(gram), std::move(rhs));
    }

    const Real fnorm = lp_norm(f, pn);
    auto scale_of = [&](const Polynomial<Real>& r) {
        return max_value(Real(1), pow_value(lp_norm(r, pn), p - one) * fnorm);
    };
    auto converged = [&](const std::vector<Real>& res, const Real& scale) {
        for (const Real& v : res)
            if (abs_value(v) > cfg.tol * scale) return false;
        return true;
    };

    int budget = cfg.max_iter;
    Real fq = objective(q);

    // Gradient descent with backtracking: dF/dq_k = -p * semi_inner(r, z^k f).
    for (int it = 0; it < 40 && budget > 0; ++it, --budget) {
        const Polynomial<Real> r = residual_poly(q);
        const std::vector<Real> res = orth_residuals(r);
        if (converged(res, scale_of(r))) break;
        Real step(1);
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<Real> qn = q;
            for (std::size_t i = 0; i < qn.size(); ++i) qn[i] += step * res[i];
            const Real fn = objective(qn);
            if (fn < fq) {
                q = std::move(qn);
                fq = fn;
                moved = true;
                break;
            }
            step /= Real(2);
        }
        if (!moved) break;
    }

    // Newton polish on the stationarity system.
    std::vector<Real> best_q = q;
    Real best_rel = std::numeric_limits<Real>::infinity();
    bool ok = false;
    const Real floor_w = Real(1e-14);
    while (budget-- > 0) {
        const Polynomial<Real> r = residual_poly(q);
        const std::vector<Real> res = orth_residuals(r);
        const Real scale = scale_of(r);
        Real worst(0);
        for (const Real& v : res) worst = max_value(worst, abs_value(v));
        if (worst / scale < best_rel) {
            best_rel = worst / scale;
            best_q = q;
        }
        if (converged(res, scale)) {
            ok = true;
            break;
        }

        std::vector<Real> w(static_cast<std::size_t>(m_len), Real(0));
        for (int m = 0; m < m_len; ++m) {
            const Real rm = max_value(abs_value(r.coeff(m)), floor_w);
            w[static_cast<std::size_t>(m)] = (p - one) * pow_value(rm, p - Real(2));
        }
        auto jac = detail::weighted_gram(f, n, w);  // -J; solve J d = -res  <=>  jac d = res
        std::vector<Real> d;
        try {
            d = detail::solve_dense(std::move(jac), res);
        } catch (const Error&) {
            break;
        }
        Real lambda(1);
        bool moved = false;
        Real res2(0);
        for (const Real& v : res) res2 += v * v;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<Real> qn = q;
            for (std::size_t i = 0; i < qn.size(); ++i) qn[i] += lambda * d[i];
            const std::vector<Real> rn = orth_residuals(residual_poly(qn));
            Real rn2(0);
            for (const Real& v : rn) rn2 += v * v;
            if (rn2 < res2) {
                q = std::move(qn);
                moved = true;
                break;
            }
            lambda /= Real(2);
        }
        if (!moved) break;
    }

    if (!ok) {
        const Polynomial<Real> r = residual_poly(q);
        if (!converged(orth_residuals(r), scale_of(r))) {
            std::vector<double> pt;
            for (const Real& v : best_q) pt.push_back(static_cast<double>(v));
            throw NewtonDivergence("solve_opa: stationarity system not converged", pt,
                                   static_cast<double>(best_rel));
        }
    }

    OpaResult<Real> out;
    out.q = Polynomial<Real>(q);
    const Polynomial<Real> r = residual_poly(q);
    out.residual_norm = lp_norm(r, pn);
    out.orth_residuals = orth_residuals(r);
    out.orth_scale = scale_of(r);
    out.zeros = detail::scan_real_roots(out.q);
    return out;
}

/**
 * Root removal: if z0 is a root of the degree-n approximant for f, then
 * g = (z - z0) f has the deflated quotient as its degree-(n-1)
 * approximant. This solves the g problem from scratch; the deflation
 * identity is what the tests check against.
 */
template <class Real>
OpaResult<Real> remove_root_opa(const Polynomial<Real>& f, const PNorm<Real>& pn, int n,
                                const Real& z0, const SolverConfig<Real>& cfg = {}) {
    if (n < 1) throw std::domain_error("remove_root_opa: need degree n >= 1");
    const OpaResult<Real> base = solve_opa(f, pn, n, cfg);
    Real scale(0);
    const Real zmag = max_value(Real(1), abs_value(z0));
    Real zp(1);
    for (int k = 0; k <= base.q.degree(); ++k) {
        scale += abs_value(base.q.coeff(k)) * zp;
        zp *= zmag;
    }
    if (abs_value(base.q(z0)) > Real(1e-6) * max_value(Real(1), scale)) {
        std::ostringstream msg;
        msg << "remove_root_opa: " << static_cast<double>(z0)
            << " is not a root of the degree-" << n << " approximant";
        throw NotARoot(msg.str());
    }
    const Polynomial<Real> g = Polynomial<Real>({-z0, Real(1)}) * f;
    return solve_opa(g, pn, n - 1, cfg);
}

/// The two sides of the finite-degree duality identity I_N * M_N = 1.
template <class Real = double>
struct DualityResult {
    Real i_n = Real(0);  // inf{ ||g||_p : g(0) = 1, g in f P_N }, read off the solved approximant
    Real m_n = Real(0);  // sup{ |phi(0)| : ||phi||_p = 1, phi in f P_N }, by direct minimization
};

/**
 * Computes both extremal values by different routes. I_N comes from the
 * solved approximant: J_N = q f / (q f)(0) and I_N = ||J_N||_p. M_N is the
 * reciprocal of min ||f (1 + c_1 z + ... + c_N z^N)||_p, solved directly by
 * damped Newton on its own stationarity system. Their product is 1 up to
 * solver tolerance; the comparison exercises the normalization constant.
 */
template <class Real>
DualityResult<Real> duality_check(const Polynomial<Real>& f, const PNorm<Real>& pn, int n,
                                  const SolverConfig<Real>& cfg = {}) {
    if (f.coeff(0) != Real(1)) throw std::domain_error("duality_check: requires f(0) = 1");
    if (n < 1) throw std::domain_error("duality_check: requires N >= 1");

    DualityResult<Real> out;
    {
        const OpaResult<Real> sol = solve_opa(f, pn, n, cfg);
        const Polynomial<Real> u = sol.q * f;
        const Real u0 = u.coeff(0);
        if (u0 == Real(0)) throw Error("duality_check: approximant vanishes at the origin");
        out.i_n = lp_norm(u, pn) / abs_value(u0);
    }

    // Direct route: minimize ||f w||_p^p over w = 1 + c_1 z + ... + c_N z^N.
    const Real p = pn.p();
    const Real one(1);
    const int m_len = f.degree() + n + 1;
    auto prod_poly = [&](const std::vector<Real>& c) {
        std::vector<Real> wc(static_cast<std::size_t>(n + 1), Real(0));
        wc[0] = one;
        for (int j = 1; j <= n; ++j) wc[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)];
        return f * Polynomial<Real>(wc);
    };
    auto grad = [&](const Polynomial<Real>& u) {
        std::vector<Real> g(static_cast<std::size_t>(n), Real(0));
        for (int j = 1; j <= n; ++j) g[static_cast<std::size_t>(j - 1)] = semi_inner(u, f.shifted(j), pn);
        return g;
    };

    std::vector<Real> c;
    {
        std::vector<Real> w(static_cast<std::size_t>(m_len), Real(1));
        auto gram_full = detail::weighted_gram(f, n, w);
        std::vector<std::vector<Real>> a(static_cast<std::size_t>(n),
                                         std::vector<Real>(static_cast<std::size_t>(n), Real(0)));
        std::vector<Real> rhs(static_cast<std::size_t>(n), Real(0));
        for (int j = 1; j <= n; ++j) {
            for (int k = 1; k <= n; ++k)
                a[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)] =
                    gram_full[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            rhs[static_cast<std::size_t>(j - 1)] = -gram_full[static_cast<std::size_t>(j)][0];
        }
        c = detail::solve_dense(std::move(a), std::move(rhs));
    }

    const Real floor_w = Real(1e-14);
    const Real fnorm = lp_norm(f, pn);
    for (int it = 0; it < 200; ++it) {
        const Polynomial<Real> u = prod_poly(c);
        const std::vector<Real> g = grad(u);
        Real worst(0);
        for (const Real& v : g) worst = max_value(worst, abs_value(v));
        const Real scale = max_value(one, pow_value(lp_norm(u, pn), p - one) * fnorm);
        if (worst <= cfg.tol * scale) break;

        std::vector<Real> w(static_cast<std::size_t>(m_len), Real(0));
        for (int m = 0; m < m_len; ++m) {
            const Real um = max_value(abs_value(u.coeff(m)), floor_w);
            w[static_cast<std::size_t>(m)] = (p - one) * pow_value(um, p - Real(2));
        }
        auto gram_full = detail::weighted_gram(f, n, w);
        std::vector<std::vector<Real>> a(static_cast<std::size_t>(n),
                                         std::vector<Real>(static_cast<std::size_t>(n), Real(0)));
        for (int j = 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                a[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)] =
                    gram_full[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        std::vector<Real> d = detail::solve_dense(std::move(a), g);
        Real lambda(1);
        Real cur = lp_norm_pow(u, pn);
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<Real> cn = c;
            for (std::size_t i = 0; i < cn.size(); ++i) cn[i] -= lambda * d[i];
            if (lp_norm_pow(prod_poly(cn), pn) < cur) {
                c = std::move(cn);
                break;
            }
            lambda /= Real(2);
        }
    }
    out.m_n = Real(1) / lp_norm(prod_poly(c), pn);
    return out;
}

}  // namespace opalab
