#pragma once

#include <stdexcept>

#include "opalab/scalar.hpp"

namespace opalab {

/// Validated sequence-space exponent p in (1, inf) together with its
/// Holder conjugate p' = p / (p - 1); 1/p + 1/p' = 1.
template <class Real = double>
class PNorm {
public:
    explicit PNorm(const Real& p) : p_(p) {
        if (!is_finite_value(p) || p <= Real(1))
            throw std::domain_error("PNorm: exponent must be finite and > 1");
        conj_ = p / (p - Real(1));
    }

    const Real& p() const { return p_; }
    const Real& conj() const { return conj_; }

    /// True when p sits inside the guard band around 2 where the p != 2
    /// operations (extremal systems, witness searches, tau) are undefined.
    bool near_two(const Real& band = Real(1e-6)) const {
        return abs_value(p_ - Real(2)) <= band;
    }

private:
    Real p_;
    Real conj_;
};

}  // namespace opalab
