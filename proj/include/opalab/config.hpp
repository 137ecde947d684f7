#pragma once

namespace opalab {

/// Shared solver knobs, surfaced as CLI flags. The bracket bounds the
/// linear-approximant minimizer: every admissible t satisfies |t| <= 2
/// (approximant roots stay outside the half-disk), so [-2.5, 2.5] always
/// contains the minimizer with margin.
template <class Real = double>
struct SolverConfig {
    Real tol = Real(1e-11);
    int max_iter = 10000;
    Real bracket_lo = Real(-2.5);
    Real bracket_hi = Real(2.5);
};

}  // namespace opalab
