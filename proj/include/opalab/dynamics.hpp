#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "opalab/detail/roots.hpp"
#include "opalab/errors.hpp"
#include "opalab/pnorm.hpp"
#include "opalab/scalar.hpp"

namespace opalab {

/// Parameters of the ratio dynamical system. Phi and Psi depend on both
/// the exponent p and the multiplier t > 0.
template <class Real = double>
struct PhiPsiParams {
    PNorm<Real> p;
    Real t;
    PhiPsiParams(const PNorm<Real>& pn, const Real& t_) : p(pn), t(t_) {
        if (!(t > Real(0))) throw std::domain_error("PhiPsiParams: t must be positive");
        if (pn.near_two()) throw UnsupportedExponent("PhiPsiParams: requires p != 2");
    }
};

/// Phi(x) = (p t - x) |x - t|^{p-2}. For p < 2 the factor |x-t|^{p-2}
/// diverges at x = t.
template <class Real>
Real phi(const PhiPsiParams<Real>& prm, const Real& x) {
    const Real p = prm.p.p();
    if (x == prm.t) {
        if (p < Real(2)) throw Singularity("phi: x = t is singular for p < 2");
        return Real(0);
    }
    return (p * prm.t - x) * pow_value(abs_value(x - prm.t), p - Real(2));
}

/// Psi(x) = (p-1) (1/x) |1 - t/x|^{p-2}.
template <class Real>
Real psi(const PhiPsiParams<Real>& prm, const Real& x) {
    if (x == Real(0)) throw PoleAtZero("psi: x = 0 is a pole");
    const Real p = prm.p.p();
    if (x == prm.t) {
        if (p < Real(2)) throw Singularity("psi: x = t is singular for p < 2");
        return Real(0);
    }
    return (p - Real(1)) / x * pow_value(abs_value(Real(1) - prm.t / x), p - Real(2));
}

/// Ordinate of the exit point (0, p t^{p-1}) on the Phi graph.
template <class Real>
Real exit_height(const PhiPsiParams<Real>& prm) {
    return prm.p.p() * pow_value(prm.t, prm.p.p() - Real(1));
}

template <class Real = double>
struct FixedPoints {
    Real xi1 = Real(0);
    Real t = Real(0);
    Real xi2 = Real(0);
};

/// The abscissas where Phi = Psi. Away from x = t these reduce to the
/// roots of g(x) = x^p - p t x^{p-1} + (p-1); for t > 1 there is one root
/// in (0, t) and one in (t, p t), and x = t itself is the third
/// intersection (p > 2). At t = 1 the lower root collapses onto t.
template <class Real>
FixedPoints<Real> fixed_points(const PhiPsiParams<Real>& prm) {
    if (prm.t < Real(1)) throw OutOfRange("fixed_points: analyzed only for t >= 1");
    const Real p = prm.p.p();
    const Real t = prm.t;
    // product form avoids the cancellation between the two x-power terms
    auto g = [&](const Real& x) {
        return pow_value(x, p - Real(1)) * (x - p * t) + (p - Real(1));
    };
    FixedPoints<Real> out;
    out.t = t;
    const Real gt = g(t);  // (p-1)(1 - t^p) <= 0, zero exactly at t = 1
    if (gt == Real(0) || t == Real(1)) {
        out.xi1 = t;
    } else {
        out.xi1 = detail::bisect(g, Real(1e-8) * t, t, g(Real(1e-8) * t), gt);
    }
    const Real hi = p * t;
    out.xi2 = detail::bisect(g, t, hi, gt == Real(0) ? Real(-1e-30) : gt, g(hi));
    return out;
}

enum class Branch { left, middle, right };

inline const char* branch_name(Branch b) {
    switch (b) {
        case Branch::left: return "left";
        case Branch::middle: return "middle";
        default: return "right";
    }
}

namespace detail {

/// Monotone piece of Phi for the requested branch: [lo, hi] with the
/// direction flag; infinite ends are expanded on demand by the inverter.
/// For p > 2 the breakpoints are t and (p-1)t. For p < 2 the pieces are
/// separated by the interior critical point (located numerically) and the
/// vertical asymptote at t.
template <class Real>
struct BranchPiece {
    Real lo, hi;       // hi may be the open asymptote end
    bool increasing;
    bool lo_open, hi_open;
};

template <class Real>
BranchPiece<Real> branch_piece(const PhiPsiParams<Real>& prm, Branch b) {
    const Real p = prm.p.p();
    const Real t = prm.t;
    const Real inf = std::numeric_limits<Real>::infinity();
    if (p > Real(2)) {
        const Real peak = (p - Real(1)) * t;
        switch (b) {
            case Branch::left: return {-inf, t, false, true, false};
            case Branch::middle: return {t, peak, true, false, false};
            default: return {peak, inf, false, false, true};
        }
    }
    // p < 2: locate the critical point of Phi on (-inf, t) numerically.
    auto value = [&](const Real& x) { return phi(prm, x); };
    Real guess = (p - Real(1)) * t;
    Real lo = guess - t;
    // move lo left until Phi is decreasing there, so [lo, t) brackets the minimum
    while (value(lo) < value(lo + Real(1e-3) * t) && lo > -Real(1e6) * t) lo -= t;
    const Real crit = detail::minimize_unimodal(value, lo, t * (Real(1) - Real(1e-12)));
    switch (b) {
        case Branch::left: return {-inf, crit, false, true, false};
        case Branch::middle: return {crit, t, true, false, true};
        default: return {t, inf, false, true, true};
    }
}

}  // namespace detail

/// Inverse of Phi restricted to one monotone branch; nullopt when y is not
/// attained there.
template <class Real>
std::optional<Real> try_invert_phi(const PhiPsiParams<Real>& prm, const Real& y, Branch b) {
    const detail::BranchPiece<Real> piece = detail::branch_piece(prm, b);
    const Real t = prm.t;
    const Real span = max_value(Real(1), t);

    Real lo = piece.lo, hi = piece.hi;
    if (piece.lo_open) {  // expand a finite probe toward -inf / asymptote
        lo = (hi == std::numeric_limits<Real>::infinity()) ? t : hi - span;
        if (b == Branch::right && prm.p.p() < Real(2)) lo = t * (Real(1) + Real(1e-14));
        if (b == Branch::left) lo = hi - span;
    }
    if (piece.hi_open) {
        hi = (piece.hi == std::numeric_limits<Real>::infinity()) ? lo + span : piece.hi;
        if (prm.p.p() < Real(2) && b == Branch::middle) hi = t * (Real(1) - Real(1e-14));
    }
    auto value = [&](const Real& x) { return phi(prm, x); };

    // Grow open ends geometrically until the target value is enclosed.
    const Real f_dir = piece.increasing ? Real(1) : Real(-1);
    for (int grow = 0; grow < 400; ++grow) {
        const Real flo = f_dir * (value(lo) - y);
        if (flo <= Real(0)) break;
        if (!piece.lo_open) return std::nullopt;  // y below the branch range
        if (b == Branch::right && prm.p.p() < Real(2)) {
            lo = t + (lo - t) / Real(2);  // approach the asymptote at t+
            if (lo - t < Real(1e-300)) return std::nullopt;
        } else {
            lo -= span * pow_value(Real(2), Real(grow));
        }
    }
    for (int grow = 0; grow < 400; ++grow) {
        const Real fhi = f_dir * (value(hi) - y);
        if (fhi >= Real(0)) break;
        if (!piece.hi_open) return std::nullopt;  // y above the branch range
        if (prm.p.p() < Real(2) && b == Branch::middle) {
            hi = t - (t - hi) / Real(2);  // approach the asymptote at t-
            if (t - hi < Real(1e-300)) return std::nullopt;
        } else {
            hi += span * pow_value(Real(2), Real(grow));
        }
    }
    const Real flo = f_dir * (value(lo) - y);
    const Real fhi = f_dir * (value(hi) - y);
    if (flo > Real(0) || fhi < Real(0)) return std::nullopt;
    auto signed_fn = [&](const Real& x) { return f_dir * (value(x) - y); };
    return detail::bisect(signed_fn, lo, hi, flo, fhi);
}

/// Throwing variant of try_invert_phi.
template <class Real>
Real invert_phi(const PhiPsiParams<Real>& prm, const Real& y, Branch b) {
    auto x = try_invert_phi(prm, y, b);
    if (!x) {
        std::ostringstream msg;
        msg << "invert_phi: y = " << static_cast<double>(y) << " misses the " << branch_name(b)
            << " branch";
        throw BranchMiss(msg.str());
    }
    return *x;
}

enum class OrbitStatus { terminated_at_exit, converged_to_fixed_point, budget_exhausted };

inline const char* orbit_status_name(OrbitStatus s) {
    switch (s) {
        case OrbitStatus::terminated_at_exit: return "terminated-at-exit";
        case OrbitStatus::converged_to_fixed_point: return "converged-to-fixed-point";
        default: return "budget-exhausted";
    }
}

template <class Real = double>
struct OrbitPoint {
    Real x = Real(0);
    std::optional<Branch> branch;  // branch used to reach this point (start has none)
};

template <class Real = double>
struct OrbitTrace {
    std::vector<OrbitPoint<Real>> points;  // x_1, x_2, ... (exit hit excluded)
    std::vector<Real> ratios;              // the R_k sequence = abscissas above
    OrbitStatus status = OrbitStatus::budget_exhausted;
    std::optional<Real> exit_x;            // near-zero abscissa that triggered termination
};

/// Branch selection for orbit iteration: exhaustive depth-first search
/// with pruning (default), or a fixed caller-supplied branch sequence.
struct BranchPolicy {
    enum class Mode { exhaustive, fixed };
    Mode mode = Mode::exhaustive;
    std::vector<Branch> sequence;    // used by Mode::fixed
    double exit_tol = 1e-6;          // |x| tolerance for hitting the exit point
    long max_nodes = 50000;          // search-size cap for the exhaustive mode
    long post_convergence_nodes = 10000;  // extra nodes to keep hunting for a terminating path
};

namespace detail {

template <class Real>
bool deltas_contracted(const std::vector<Real>& xs) {
    const std::size_t n = xs.size();
    if (n < 4) return false;
    for (std::size_t i = n - 3; i < n; ++i)
        if (abs_value(xs[i] - xs[i - 1]) >= Real(1e-12) * max_value(Real(1), abs_value(xs[i - 1])))
            return false;
    return true;
}

}  // namespace detail

/**
 * Iterates the implicit system Phi(x_{k+1}) = Psi(x_k) from x1. Each step
 * has up to three admissible preimages; the exhaustive policy explores
 * them depth-first (left branch first), pruning misses and iterates
 * leaving (0, p t]. A path terminates when the next abscissa lands within
 * exit_tol of 0 with the matching ordinate p t^{p-1}; it is declared
 * convergent after three consecutive steps move less than 1e-12. Returns
 * the first terminating path if any, else the first convergent one, else
 * a budget-exhausted trace.
 */
template <class Real>
OrbitTrace<Real> iterate_orbit(const PhiPsiParams<Real>& prm, const Real& x1,
                               const BranchPolicy& policy, int budget) {
    if (!(x1 > Real(0))) throw std::domain_error("iterate_orbit: x1 must be positive");
    const Real exit_tol = Real(policy.exit_tol);
    const Real h_exit = exit_height(prm);
    const Real t = prm.t;
    const Real p = prm.p.p();
    // |Phi'(0)| scales the ordinate check matching |x| <= exit_tol near 0.
    const Real dphi0 = pow_value(t, p - Real(2)) * abs_value(Real(1) + p * (p - Real(2)));

    struct Node {
        Real x;
        std::optional<Branch> via;
        int parent;   // arena index, -1 for root
        int depth;    // 0 for x1
    };
    std::vector<Node> arena;
    arena.push_back({x1, std::nullopt, -1, 0});

    auto path_of = [&](int leaf) {
        std::vector<int> idx;
        for (int i = leaf; i >= 0; i = arena[static_cast<std::size_t>(i)].parent) idx.push_back(i);
        OrbitTrace<Real> trace;
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
            const Node& nd = arena[static_cast<std::size_t>(*it)];
            trace.points.push_back({nd.x, nd.via});
            trace.ratios.push_back(nd.x);
        }
        return trace;
    };
    auto xs_of = [&](int leaf) {
        std::vector<Real> xs;
        for (int i = leaf; i >= 0; i = arena[static_cast<std::size_t>(i)].parent)
            xs.push_back(arena[static_cast<std::size_t>(i)].x);
        std::reverse(xs.begin(), xs.end());
        return xs;
    };

    std::optional<int> converged_leaf;
    int deepest_leaf = 0;

    if (policy.mode == BranchPolicy::Mode::fixed) {
        int cur = 0;
        for (std::size_t step = 0; step < policy.sequence.size() && static_cast<int>(step) < budget; ++step) {
            const Real y = psi(prm, arena[static_cast<std::size_t>(cur)].x);
            const Branch b = policy.sequence[step];
            auto xn = try_invert_phi(prm, y, b);
            if (!xn) {
                OrbitTrace<Real> partial = path_of(cur);
                std::vector<double> xs;
                for (const Real& v : partial.ratios) xs.push_back(static_cast<double>(v));
                throw BranchMiss("iterate_orbit: fixed branch sequence misses", xs);
            }
            if (abs_value(*xn) <= exit_tol && abs_value(y - h_exit) <= exit_tol * (Real(1) + dphi0)) {
                OrbitTrace<Real> trace = path_of(cur);
                trace.status = OrbitStatus::terminated_at_exit;
                trace.exit_x = *xn;
                return trace;
            }
            arena.push_back({*xn, b, cur, arena[static_cast<std::size_t>(cur)].depth + 1});
            cur = static_cast<int>(arena.size()) - 1;
            if (detail::deltas_contracted(xs_of(cur))) {
                OrbitTrace<Real> trace = path_of(cur);
                trace.status = OrbitStatus::converged_to_fixed_point;
                return trace;
            }
        }
        OrbitTrace<Real> trace = path_of(cur);
        trace.status = OrbitStatus::budget_exhausted;
        return trace;
    }

    std::vector<int> stack{0};
    long visited = 0;
    long visited_at_convergence = -1;
    bool any_expansion = false;
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        if (++visited > policy.max_nodes) break;
        if (visited_at_convergence >= 0 && visited > visited_at_convergence + policy.post_convergence_nodes)
            break;
        const Node nd = arena[static_cast<std::size_t>(cur)];
        if (nd.depth > arena[static_cast<std::size_t>(deepest_leaf)].depth) deepest_leaf = cur;
        if (nd.depth >= budget) {
            any_expansion = true;  // path alive at the depth cap
            continue;
        }
        Real y;
        try {
            y = psi(prm, nd.x);
        } catch (const Error&) {
            continue;  // exact singular abscissa; measure-zero path
        }

        // Push right/middle first so the left branch pops first.
        const Branch order[3] = {Branch::right, Branch::middle, Branch::left};
        for (const Branch b : order) {
            auto xn = try_invert_phi(prm, y, b);
            if (!xn) continue;
            if (abs_value(*xn) <= exit_tol) {
                if (abs_value(y - h_exit) <= exit_tol * (Real(1) + dphi0)) {
                    OrbitTrace<Real> trace = path_of(cur);
                    trace.status = OrbitStatus::terminated_at_exit;
                    trace.exit_x = *xn;
                    return trace;
                }
                continue;
            }
            if (*xn <= Real(0) || *xn > p * t * (Real(1) + Real(1e-12))) continue;  // leaves (0, pt]
            arena.push_back({*xn, b, cur, nd.depth + 1});
            const int child = static_cast<int>(arena.size()) - 1;
            if (!converged_leaf && detail::deltas_contracted(xs_of(child))) {
                converged_leaf = child;
                visited_at_convergence = visited;
                continue;  // contraction cannot terminate; stop expanding it
            }
            stack.push_back(child);
            any_expansion = true;
        }
    }

    if (converged_leaf) {
        OrbitTrace<Real> trace = path_of(*converged_leaf);
        trace.status = OrbitStatus::converged_to_fixed_point;
        return trace;
    }
    if (any_expansion || budget == 0) {
        OrbitTrace<Real> trace = path_of(deepest_leaf);
        trace.status = OrbitStatus::budget_exhausted;
        return trace;
    }
    OrbitTrace<Real> partial = path_of(deepest_leaf);
    std::vector<double> xs;
    for (const Real& v : partial.ratios) xs.push_back(static_cast<double>(v));
    throw BranchMiss("iterate_orbit: every path pruned before termination", xs);
}

/// Plot-ready cobweb content: sampled curves plus the alternating
/// vertical/horizontal segments of a trace.
struct CobwebData {
    struct CurveSample {
        double x, phi, psi;
    };
    struct Segment {
        double x0, y0, x1, y1;
        bool vertical;
    };
    std::vector<CurveSample> curves;
    std::vector<Segment> segments;
};

template <class Real>
CobwebData export_cobweb(const OrbitTrace<Real>& trace, const PhiPsiParams<Real>& prm,
                         int samples = 512) {
    CobwebData out;
    const Real t = prm.t;
    const Real hi = prm.p.p() * t * Real(1.05);
    for (int i = 1; i <= samples; ++i) {
        const Real x = hi * Real(i) / Real(samples);
        if (prm.p.p() < Real(2) && abs_value(x - t) < Real(1e-9) * t) continue;
        out.curves.push_back({static_cast<double>(x), static_cast<double>(phi(prm, x)),
                              static_cast<double>(psi(prm, x))});
    }
    if (trace.points.empty()) return out;

    Real y_prev(0);
    for (std::size_t k = 0; k < trace.points.size(); ++k) {
        const Real x = trace.points[k].x;
        const Real y = psi(prm, x);
        out.segments.push_back({static_cast<double>(x), static_cast<double>(y_prev),
                                static_cast<double>(x), static_cast<double>(y), true});
        std::optional<Real> x_next;
        if (k + 1 < trace.points.size())
            x_next = trace.points[k + 1].x;
        else if (trace.exit_x)
            x_next = *trace.exit_x;
        if (x_next) {
            out.segments.push_back({static_cast<double>(x), static_cast<double>(y),
                                    static_cast<double>(*x_next), static_cast<double>(y), false});
            y_prev = y;
        }
    }
    return out;
}

}  // namespace opalab
