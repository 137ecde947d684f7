#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace opalab {

// ADL-friendly wrappers so the same code runs on double and on
// multiprecision number types.

template <class Real>
inline bool is_finite_value(const Real& x) {
    return x == x && x != std::numeric_limits<Real>::infinity() &&
           x != -std::numeric_limits<Real>::infinity();
}

template <class Real>
inline Real abs_value(const Real& x) {
    using std::abs;
    return abs(x);
}

template <class Real>
inline Real pow_value(const Real& x, const Real& e) {
    using std::pow;
    return pow(x, e);
}

template <class Real>
inline Real log_value(const Real& x) {
    using std::log;
    return log(x);
}

template <class Real>
inline int sign_of(const Real& x) {
    return (x > Real(0)) - (x < Real(0));
}

template <class Real>
inline const Real& max_value(const Real& a, const Real& b) {
    return a < b ? b : a;
}

template <class Real>
inline const Real& min_value(const Real& a, const Real& b) {
    return b < a ? b : a;
}

/// Signed power x^<s> = sign(x) * |x|^s for real x and s >= 0.
/// x = 0 maps to 0 for every s, including s = 0: occurrences of
/// "|0|^(p-2) * 0" in the norm derivative formulas are zero by convention.
template <class Real>
Real signed_power(const Real& x, const Real& s) {
    if (!is_finite_value(x)) throw std::domain_error("signed_power: non-finite argument");
    if (!is_finite_value(s) || s < Real(0)) throw std::domain_error("signed_power: exponent must be finite and >= 0");
    if (x == Real(0)) return Real(0);
    const Real mag = pow_value(abs_value(x), s);
    return x < Real(0) ? -mag : mag;
}

}  // namespace opalab
