#pragma once

#include <sstream>
#include <vector>

#include "opalab/errors.hpp"
#include "opalab/opa.hpp"
#include "opalab/pnorm.hpp"
#include "opalab/polynomial.hpp"

namespace opalab {

/// Witness family for 1 < p < 2: f_k(z) = sum_{j=0}^k (j+1) z^j.
template <class Real = double>
Polynomial<Real> family_small_p(int k) {
    if (k < 1) throw std::domain_error("family_small_p: k must be >= 1");
    std::vector<Real> c(static_cast<std::size_t>(k + 1), Real(0));
    for (int j = 0; j <= k; ++j) c[static_cast<std::size_t>(j)] = Real(j + 1);
    return Polynomial<Real>(std::move(c));
}

/// Witness family for p > 2: 1 + sum_{j=1}^{2k} (2 - (j-1)/k) z^j.
template <class Real = double>
Polynomial<Real> family_large_p(int k) {
    if (k < 1) throw std::domain_error("family_large_p: k must be >= 1");
    std::vector<Real> c(static_cast<std::size_t>(2 * k + 1), Real(0));
    c[0] = Real(1);
    for (int j = 1; j <= 2 * k; ++j)
        c[static_cast<std::size_t>(j)] = Real(2) - Real(j - 1) / Real(k);
    return Polynomial<Real>(std::move(c));
}

/// g(t) = sum_{j=1}^k ((j+1) - t j)^<p-1> j + (-t (k+1))^<p-1> (k+1),
/// the sign-bracketing function for the small-p family. Equals
/// -h'(f_k, t)/p up to the indexing convention.
template <class Real>
Real g_of_t(int k, const PNorm<Real>& pn, const Real& t) {
    if (k < 1) throw std::domain_error("g_of_t: k must be >= 1");
    const Real s = pn.p() - Real(1);
    Real acc(0);
    for (int j = 1; j <= k; ++j)
        acc += signed_power(Real(j + 1) - t * Real(j), s) * Real(j);
    acc += signed_power(-t * Real(k + 1), s) * Real(k + 1);
    return acc;
}

template <class Real = double>
struct ExtraZeroWitness {
    int k = 0;
    Polynomial<Real> f;
    Real zero = Real(0);
    bool inside_disk = false;
};

template <class Real = double>
struct WitnessSearchConfig {
    int k_cap = 5000;
    Real p_guard = Real(1e-6);
    SolverConfig<Real> solver;
};

/**
 * Smallest family index k whose optimal linear approximant has its root
 * strictly inside the unit disk. Uses the small-p family for p < 2 and the
 * large-p family for p > 2; termination for some finite k is guaranteed on
 * both sides of 2. Near p = 2 the witness index diverges, so the guard
 * band fails loudly instead of spinning.
 */
template <class Real>
ExtraZeroWitness<Real> find_min_k_extra_zero(const PNorm<Real>& pn,
                                             const WitnessSearchConfig<Real>& cfg = {}) {
    if (pn.near_two(cfg.p_guard))
        throw UnsupportedExponent("find_min_k_extra_zero: p = 2 admits no interior zeros");
    const bool small = pn.p() < Real(2);
    for (int k = 1; k <= cfg.k_cap; ++k) {
        const Polynomial<Real> f = small ? family_small_p<Real>(k) : family_large_p<Real>(k);
        const Real t = linear_opa_t(f, pn, cfg.solver);
        if (abs_value(t) > Real(1)) {
            ExtraZeroWitness<Real> w;
            w.k = k;
            w.f = f;
            w.zero = Real(1) / t;
            w.inside_disk = true;
            return w;
        }
    }
    std::ostringstream msg;
    msg << "find_min_k_extra_zero: no witness up to k = " << cfg.k_cap;
    throw CapExceeded(msg.str());
}

}  // namespace opalab
