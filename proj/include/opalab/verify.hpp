#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opalab/dynamics.hpp"
#include "opalab/families.hpp"
#include "opalab/io.hpp"
#include "opalab/lagrange.hpp"
#include "opalab/norms.hpp"
#include "opalab/opa.hpp"
#include "opalab/radius.hpp"

namespace opalab {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::optional<double> tol_override;  // replaces each check's tolerance when set
    std::vector<double> p_filter;        // restrict exponent grids; empty = defaults
    int restarts = 8;                    // multistart budget of the direct maximizer
    std::uint64_t rng_seed = 20240801u;
};

namespace detail_verify {

inline Polynomial<double> random_poly(std::mt19937_64& rng, int max_d = 6) {
    std::uniform_int_distribution<int> dd(1, max_d);
    std::uniform_real_distribution<double> dc(-2.0, 2.0);
    const int d = dd(rng);
    std::vector<double> c(static_cast<std::size_t>(d + 1));
    for (auto& v : c) v = dc(rng);
    while (std::abs(c[0]) < 0.2) c[0] = dc(rng);
    return Polynomial<double>(c);
}

inline std::vector<double> filtered(const std::vector<double>& defaults,
                                    const std::vector<double>& filter, bool drop_two) {
    std::vector<double> src = filter.empty() ? defaults : filter;
    std::vector<double> out;
    for (double p : src) {
        if (drop_two && std::abs(p - 2.0) <= 1e-6) continue;
        out.push_back(p);
    }
    return out;
}

struct Battery {
    const VerifyOptions& opts;
    std::vector<CheckResult> results;
    std::mt19937_64 rng;

    explicit Battery(const VerifyOptions& o) : opts(o), rng(o.rng_seed) {}

    double tol(double def) const { return opts.tol_override.value_or(def); }

    void record(const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    }

    void run_check(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [pass, detail] = fn();
            record(name, pass, detail);
        } catch (const std::exception& e) {
            record(name, false, std::string("exception: ") + e.what());
        }
    }
};

}  // namespace detail_verify

/// Runs every module's invariant battery at desk scale and reports one
/// pass/fail entry per named check.
inline std::vector<CheckResult> run_verification(const VerifyOptions& opts = {}) {
    using detail_verify::filtered;
    using detail_verify::random_poly;
    detail_verify::Battery b(opts);
    auto& rng = b.rng;

    const std::vector<double> generic_p = filtered({1.5, 1.75, 2.0, 2.5, 4.0, 6.0}, opts.p_filter, false);
    const std::vector<double> extremal_p = filtered({4, 6, 8, 10}, opts.p_filter, true);
    const bool wants_p2 = [&] {
        if (opts.p_filter.empty()) return true;
        for (double p : opts.p_filter)
            if (std::abs(p - 2.0) <= 1e-6) return true;
        return false;
    }();

    // ---- core-lp ----
    b.run_check("core-lp/bj-definitional", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-12);
        for (int trial = 0; trial < 20; ++trial) {
            for (double pv : generic_p) {
                PNorm<double> pn(pv);
                const auto f = random_poly(rng);
                auto g0 = random_poly(rng);
                // project to semi_inner(f, g) = 0 using linearity in the second slot
                const double mu = semi_inner(f, g0, pn) / lp_norm_pow(f, pn);
                const Polynomial<double> g = g0 - mu * f;
                if (std::abs(semi_inner(f, g, pn)) > 1e-9 * std::max(1.0, lp_norm_pow(f, pn)))
                    continue;
                const double base = lp_norm(f, pn);
                for (int e = -3; e <= 0; ++e) {
                    for (double sgn : {-1.0, 1.0}) {
                        const double alpha = sgn * std::pow(10.0, e);
                        if (lp_norm(f + alpha * g, pn) < base - eps)
                            return {false, "norm dropped below ||f|| at alpha=" + std::to_string(alpha)};
                    }
                }
            }
        }
        return {true, "norm minimality holds on the alpha grid"};
    });

    b.run_check("core-lp/derivative-identity", [&]() -> std::pair<bool, std::string> {
        const double rel = b.tol(1e-6);
        for (double s : {1.5, 3.0, 5.0}) {
            for (double t : {-2.0, -0.5, 0.5, 2.0}) {
                const double h = 1e-6 * std::max(1.0, std::abs(t));
                const double fd =
                    (std::pow(std::abs(t + h), s) - std::pow(std::abs(t - h), s)) / (2 * h);
                const double an = s * signed_power(t, s - 1);
                if (std::abs(fd - an) > rel * std::max(1.0, std::abs(an)))
                    return {false, "mismatch at s=" + std::to_string(s) + " t=" + std::to_string(t)};
            }
        }
        return {true, "d/dt |t|^s = s t^<s-1> against central differences"};
    });

    b.run_check("core-lp/norm-homogeneity", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-12);
        std::uniform_real_distribution<double> dc(-3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            for (double pv : generic_p) {
                PNorm<double> pn(pv);
                const auto f = random_poly(rng);
                const double c = dc(rng);
                const double lhs = lp_norm(c * f, pn);
                const double rhs = std::abs(c) * lp_norm(f, pn);
                if (std::abs(lhs - rhs) > eps * std::max(1.0, rhs)) return {false, "violated"};
            }
        }
        return {true, "|c| factors out of the norm"};
    });

    b.run_check("core-lp/semi-inner-linearity", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-12);
        std::uniform_real_distribution<double> dc(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            for (double pv : generic_p) {
                PNorm<double> pn(pv);
                const auto f = random_poly(rng);
                const auto g = random_poly(rng);
                const auto h = random_poly(rng);
                const double al = dc(rng), be = dc(rng);
                const double lhs = semi_inner(f, al * g + be * h, pn);
                const double rhs = al * semi_inner(f, g, pn) + be * semi_inner(f, h, pn);
                if (std::abs(lhs - rhs) > eps * std::max(1.0, std::abs(rhs))) return {false, "violated"};
            }
        }
        return {true, "second slot is linear"};
    });

    // ---- opa ----
    b.run_check("opa/h-convexity", [&]() -> std::pair<bool, std::string> {
        for (int trial = 0; trial < 200; ++trial) {
            const double pv = generic_p[static_cast<std::size_t>(trial) % generic_p.size()];
            PNorm<double> pn(pv);
            const auto f = random_poly(rng);
            std::vector<double> hv;
            const int grid = 50;
            for (int i = 0; i <= grid; ++i)
                hv.push_back(h_value(f, pn, -2.5 + 5.0 * i / grid));
            const double step = 5.0 / grid;
            double prev = (hv[1] - hv[0]) / step;
            const double slack = b.tol(1e-9) * std::max(1.0, h_value(f, pn, 2.5));
            for (std::size_t i = 2; i < hv.size(); ++i) {
                const double cur = (hv[i] - hv[i - 1]) / step;
                if (cur < prev - slack) return {false, "difference quotients decreased"};
                prev = cur;
            }
        }
        return {true, "difference quotients nondecreasing on 200 random (f, p)"};
    });

    b.run_check("opa/bj-orthogonal-at-optimum", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-7);
        for (int trial = 0; trial < 200; ++trial) {
            const double pv = generic_p[static_cast<std::size_t>(trial) % generic_p.size()];
            PNorm<double> pn(pv);
            const auto f = random_poly(rng);
            const double t = linear_opa_t(f, pn);
            const Polynomial<double> j1 = Polynomial<double>{1.0, -t} * f;
            if (!is_bj_orthogonal(j1, f.shifted(1), pn, eps))
                return {false, "residual above tolerance at p=" + std::to_string(pv)};
        }
        return {true, "(1 - t z) f orthogonal to z f at every solved minimizer"};
    });

    if (wants_p2) {
        b.run_check("opa/p2-closed-form", [&]() -> std::pair<bool, std::string> {
            const double eps = b.tol(1e-10);
            PNorm<double> p2(2.0);
            for (int trial = 0; trial < 200; ++trial) {
                const auto f = random_poly(rng);
                const double t = linear_opa_t(f, p2);
                double num = 0, den = 0;
                for (int k = 0; k <= f.degree(); ++k) {
                    num += f.coeff(k + 1) * f.coeff(k);
                    den += f.coeff(k) * f.coeff(k);
                }
                if (std::abs(t - num / den) > eps) return {false, "mismatch vs <zf,f>/||f||^2"};
            }
            return {true, "matches the Euclidean projection formula"};
        });
    }

    b.run_check("opa/nonneg-reduction", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-10);
        for (int trial = 0; trial < 100; ++trial) {
            const double pv = generic_p[static_cast<std::size_t>(trial) % generic_p.size()];
            PNorm<double> pn(pv);
            const auto f = random_poly(rng);
            const double tf = linear_opa_t(f, pn);
            const double tg = linear_opa_t(absolute_coeffs(f), pn);
            if (std::abs(tf) > tg + eps) return {false, "|t_f| exceeded t of the |coeff| polynomial"};
        }
        return {true, "|t_f| <= t_{|f|} across random signed polynomials"};
    });

    b.run_check("opa/sign-symmetry", [&]() -> std::pair<bool, std::string> {
        const double eps = b.tol(1e-10);
        for (int trial = 0; trial < 100; ++trial) {
            const double pv = generic_p[static_cast<std::size_t>(trial) % generic_p.size()];
            PNorm<double> pn(pv);
            const auto f = random_poly(rng);
            const double t1 = linear_opa_t(f, pn);
            const double t2 = linear_opa_t(alternate_signs(f), pn);
            if (std::abs(t1 + t2) > eps * std::max(1.0, std::abs(t1))) return {false, "t_{f(-z)} != -t_f"};
        }
        return {true, "sign-flip map negates the minimizer"};
    });

    b.run_check("opa/zero-exclusion", [&]() -> std::pair<bool, std::string> {
        for (int trial = 0; trial < 200; ++trial) {
            const double pv = generic_p[static_cast<std::size_t>(trial) % generic_p.size()];
            PNorm<double> pn(pv);
            const auto f = random_poly(rng);
            const auto res = solve_linear_opa(f, pn);
            if (!std::isfinite(res.t)) return {false, "non-finite minimizer"};
            if (res.zero && std::abs(*res.zero) <= 0.5) return {false, "root inside the half-disk"};
        }
        return {true, "every reported root has modulus > 1/2"};
    });

    // ---- families ----
    b.run_check("families/witness-bracketing", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({1.5, 1.75, 3.0, 4.0, 6.0}, opts.p_filter, true);
        if (ps.empty()) return {true, "skipped (no applicable p)"};
        for (double pv : ps) {
            PNorm<double> pn(pv);
            const auto w = find_min_k_extra_zero(pn);
            if (std::abs(w.zero) >= 1.0) return {false, "witness root not inside the disk"};
            if (pv < 2.0) {
                if (!(g_of_t(w.k, pn, 1.0) > 0.0) || !(g_of_t(w.k, pn, 2.0) < 0.0))
                    return {false, "g(1) > 0 > g(2) fails at the witness index"};
            } else {
                if (!(h_prime(w.f, pn, 1.0) < 0.0)) return {false, "h'(1) < 0 fails at the witness index"};
            }
        }
        return {true, "bracketing signs hold at every witness"};
    });

    if (wants_p2) {
        b.run_check("families/p2-modulus", [&]() -> std::pair<bool, std::string> {
            PNorm<double> p2(2.0);
            const double eps = b.tol(1e-12);
            for (int k = 1; k <= 10; ++k) {
                for (const auto& f : {family_small_p<double>(k), family_large_p<double>(k)}) {
                    const double t = linear_opa_t(f, p2);
                    if (std::abs(t) > 1.0 + eps) return {false, "interior zero at p = 2"};
                }
            }
            return {true, "no family member has an interior zero at p = 2"};
        });
    }

    // ---- extremal ----
    std::vector<std::vector<LagrangeSolution<double>>> chains;
    for (double pv : extremal_p) {
        try {
            chains.push_back(extremal_chain(PNorm<double>(pv), 6));
        } catch (const std::exception&) {
            chains.push_back({});
        }
    }

    b.run_check("extremal/solution-invariants", [&]() -> std::pair<bool, std::string> {
        if (extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps_a1 = b.tol(1e-9);
        const double eps_h = b.tol(1e-8);
        for (std::size_t i = 0; i < chains.size(); ++i) {
            if (chains[i].empty()) return {false, "chain failed for p=" + std::to_string(extremal_p[i])};
            for (const auto& s : chains[i]) {
                PNorm<double> pn(s.p);
                if (std::abs(s.a.coeff(1) - s.p * s.t) > eps_a1) return {false, "a_1 != p t"};
                if (!(s.a.coeff(s.d) > 1e-12)) return {false, "leading coefficient vanished"};
                const double hs = std::max(1.0, h_prime_scale(s.a, pn, s.t));
                if (std::abs(s.hprime_at_t) > eps_h * hs) return {false, "h'(t) does not vanish"};
            }
        }
        return {true, "a_1 = p t, positive leading coefficient, h'(t) = 0 throughout"};
    });

    b.run_check("extremal/monotonicity", [&]() -> std::pair<bool, std::string> {
        if (extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-9);
        for (const auto& chain : chains) {
            for (std::size_t i = 1; i < chain.size(); ++i)
                if (!(chain[i].t > chain[i - 1].t + eps)) return {false, "extremal value not increasing in d"};
        }
        return {true, "strictly increasing in d for every tested p"};
    });

    b.run_check("extremal/oracle-agreement", [&]() -> std::pair<bool, std::string> {
        if (extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-4);
        for (std::size_t i = 0; i < chains.size(); ++i) {
            if (chains[i].empty()) continue;
            for (int d : {2, 3}) {
                const auto& sol = chains[i][static_cast<std::size_t>(d - 2)];
                const auto [t_direct, a_direct] = maximize_t_direct(PNorm<double>(extremal_p[i]), d,
                                                                    opts.restarts, opts.rng_seed);
                if (std::abs(t_direct - sol.t) > eps)
                    return {false, "direct ascent disagrees at p=" + std::to_string(extremal_p[i]) +
                                       " d=" + std::to_string(d)};
                for (int k = 0; k <= a_direct.degree(); ++k)
                    if (!(a_direct.coeff(k) > 0)) return {false, "maximizer has a nonpositive entry"};
            }
        }
        return {true, "system solutions match multistart ascent to 1e-4"};
    });

    b.run_check("extremal/prefix-extension", [&]() -> std::pair<bool, std::string> {
        if (extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-6);
        for (const auto& chain : chains) {
            if (chain.empty()) continue;
            const auto& sol = chain[0];
            PNorm<double> pn(sol.p);
            for (int m : {1, 3}) {
                const auto ext = extend_solution(sol, m);
                const double t = linear_opa_t(ext, pn);
                if (std::abs(t - sol.t) > eps) return {false, "extension changed the minimizer"};
            }
        }
        return {true, "geometric prefix extensions preserve the minimizer"};
    });

    // ---- dynamics ----
    b.run_check("dynamics/shape-monotonicity", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({4.0, 6.0}, opts.p_filter, true);
        if (ps.empty()) return {true, "skipped (no applicable p)"};
        const double slack = b.tol(1e-12);
        for (double pv : ps) {
            for (double t : {1.0, 1.2, 1.5}) {
                PhiPsiParams<double> prm(PNorm<double>(pv), t);
                const double peak = (pv - 1.0) * t;
                struct Piece {
                    double lo, hi;
                    bool inc;
                    bool is_phi;
                };
                const Piece pieces[] = {{-1.0, t, false, true},        {t, peak, true, true},
                                        {peak, peak + 3.0, false, true}, {0.05 * t, t, false, false},
                                        {t, peak, true, false},          {peak, peak + 3.0, false, false}};
                for (const auto& pc : pieces) {
                    double prev = pc.is_phi ? phi(prm, pc.lo) : psi(prm, pc.lo);
                    for (int i = 1; i <= 1000; ++i) {
                        const double x = pc.lo + (pc.hi - pc.lo) * i / 1000.0;
                        const double v = pc.is_phi ? phi(prm, x) : psi(prm, x);
                        const double scale = slack * std::max(1.0, std::abs(prev));
                        if (pc.inc ? v < prev - scale : v > prev + scale)
                            return {false, "monotonicity violated on a stated interval"};
                        prev = v;
                    }
                }
            }
        }
        return {true, "Phi and Psi monotone on every stated interval"};
    });

    b.run_check("dynamics/local-behavior-near-t", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({4.0, 6.0}, opts.p_filter, true);
        if (ps.empty()) return {true, "skipped (no applicable p)"};
        for (double pv : ps) {
            PNorm<double> pn(pv);
            for (double t : {1.1, 1.3}) {
                PhiPsiParams<double> prm(pn, t);
                for (double mag : {1e-4, 1e-3, 1e-2}) {
                    for (double sgn : {-1.0, 1.0}) {
                        const double x = t + sgn * mag;
                        if (phi(prm, x) < psi(prm, x)) return {false, "Phi < Psi near x = t for t > 1"};
                    }
                }
            }
            PhiPsiParams<double> prm1(pn, 1.0);
            for (double mag : {1e-4, 1e-3, 1e-2}) {
                if (!(phi(prm1, 1.0 + mag) > psi(prm1, 1.0 + mag))) return {false, "t=1 right side"};
                if (!(phi(prm1, 1.0 - mag) < psi(prm1, 1.0 - mag))) return {false, "t=1 left side"};
            }
        }
        return {true, "inequalities around x = t behave as stated"};
    });

    b.run_check("dynamics/ratio-form-equivalence", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({4.0}, opts.p_filter, true);
        if (ps.empty() || extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-10);
        for (const auto& chain : chains) {
            if (chain.empty() || std::abs(chain[0].p - 4.0) > 1e-9) continue;
            for (int d : {3, 4}) {
                const auto& sol = chain[static_cast<std::size_t>(d - 2)];
                PhiPsiParams<double> prm(PNorm<double>(sol.p), sol.t);
                for (int k = 1; k < d; ++k) {
                    const double rk = sol.a.coeff(k) / sol.a.coeff(k - 1);
                    const double rk1 = sol.a.coeff(k + 1) / sol.a.coeff(k);
                    const double lhs = phi(prm, rk1);
                    const double rhs = psi(prm, rk);
                    if (std::abs(lhs - rhs) > eps * std::max(1.0, std::abs(rhs)))
                        return {false, "ratio recurrence unsatisfied"};
                }
            }
        }
        return {true, "coefficient solutions satisfy the ratio recurrence"};
    });

    b.run_check("dynamics/parameter-monotonicity", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({4.0}, opts.p_filter, true);
        if (ps.empty()) return {true, "skipped (no applicable p)"};
        PNorm<double> pn(4.0);
        double prev_psi = 0, prev_phi = 0;
        bool first = true;
        for (double t : {1.05, 1.1, 1.15, 1.2}) {
            PhiPsiParams<double> prm(pn, t);
            const double at_start = psi(prm, 4.0 * t);
            const auto [xi1, xi2] = xi_pair(pn, t);
            (void)xi2;
            const double at_xi1 = phi(prm, xi1);
            if (!first) {
                if (!(at_start < prev_psi)) return {false, "Psi(p t) not decreasing in t"};
                if (!(at_xi1 > prev_phi)) return {false, "Phi(xi1) not increasing in t"};
            }
            prev_psi = at_start;
            prev_phi = at_xi1;
            first = false;
        }
        return {true, "Psi(p t) falls and Phi(xi1) rises with t"};
    });

    // ---- radius ----
    b.run_check("radius/boundary-identity", [&]() -> std::pair<bool, std::string> {
        const auto ps = filtered({2.1, 4, 6, 8, 10, 12, 14, 16}, opts.p_filter, false);
        if (ps.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-12);
        for (double pv : ps) {
            if (pv < 2.0) continue;
            const auto ex = exclusion_radius(PNorm<double>(pv));
            const double s = ex.s_min;
            const double lhs = std::pow(s - 1.0, pv) + std::pow(s, pv) / (std::pow(2.0, pv - 1.0) - 1.0);
            if (std::abs(lhs - 1.0) > eps * std::max(1.0, std::abs(lhs)))
                return {false, "boundary equation violated"};
        }
        return {true, "(s-1)^p + s^p/(2^{p-1}-1) = 1 at the solved s"};
    });

    b.run_check("radius/s-monotone", [&]() -> std::pair<bool, std::string> {
        double prev = 0;
        for (double pv : {4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0}) {
            const auto ex = exclusion_radius(PNorm<double>(pv));
            if (ex.s_min <= prev) return {false, "s not increasing in p"};
            prev = ex.s_min;
        }
        return {true, "s increases along the even grid"};
    });

    b.run_check("radius/sandwich", [&]() -> std::pair<bool, std::string> {
        if (extremal_p.empty()) return {true, "skipped (no applicable p)"};
        const double eps = b.tol(1e-9);
        for (std::size_t i = 0; i < chains.size(); ++i) {
            if (chains[i].empty()) continue;
            PNorm<double> pn(extremal_p[i]);
            const auto tau = solve_tau(pn);
            const auto ex = exclusion_radius(pn);
            if (ex.r > 1.0 / tau.tau + eps) return {false, "exclusion radius exceeds 1/tau"};
            if (!(1.0 / tau.tau < 1.0)) return {false, "1/tau not inside the disk"};
            for (const auto& s : chains[i])
                if (!(tau.tau > s.t + eps)) return {false, "tau not strictly above the extremal value"};
        }
        return {true, "r(p) <= 1/tau_p <= 1/T_{d,p} with strict gaps"};
    });

    // ---- cli-io ----
    b.run_check("io/json-round-trip", [&]() -> std::pair<bool, std::string> {
        PNorm<double> pn(4.0);
        const auto f = Polynomial<double>{1.0, 0.7, -0.3};
        const auto lin = solve_linear_opa(f, pn);
        const auto j = to_json_record(lin, pn.p());
        const std::string s1 = j.dump();
        const auto parsed = nlohmann::json::parse(s1);
        const std::string s2 = parsed.dump();
        if (s1 != s2) return {false, "re-serialization differs"};
        if (parsed["t"].get<double>() != lin.t) return {false, "t not bit-identical"};
        return {true, "dump -> parse -> dump is byte-identical"};
    });

    return b.results;
}

}  // namespace opalab
