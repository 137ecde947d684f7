#include <doctest.h>

#include <cmath>
#include <random>

#include "opalab/lagrange.hpp"

using namespace opalab;

namespace {

// sample rows of the bundled reference table (d, p, 1/t, coefficients)
struct Row {
    int d;
    double p;
    double inv_t;
    std::vector<double> coeffs;
};

const Row kRows[] = {
    {2, 4, 1.09638, {1, 3.64836, 1.92310}},
    {2, 6, 0.95629, {1, 6.27424, 3.36907}},
    {3, 6, 0.82606, {1, 7.26338, 5.34352, 3.00715}},
    {4, 10, 0.68277, {1, 14.6463, 12.51665, 9.69994, 5.77764}},
};

}  // namespace

TEST_CASE("lagrange_residuals at a rounded reference row") {
    const Row& row = kRows[0];
    PNorm<double> pn(row.p);
    const double t = 1.0 / row.inv_t;
    const Polynomial<double> a(row.coeffs);
    const auto res = lagrange_residuals(pn, t, a);
    REQUIRE(res.size() == static_cast<std::size_t>(row.d + 1));
    const double scale = std::max(1.0, std::pow(a.max_abs_coeff(), row.p - 1.0));
    for (double r : res) CHECK(std::abs(r) <= 1e-3 * scale);  // table rounding, 5 digits

    // residual_0 reports a_1 - p t
    const Polynomial<double> bad{1.0, 3.0, 1.92310};
    const auto res_bad = lagrange_residuals(pn, t, bad);
    CHECK(res_bad[0] == doctest::Approx(3.0 - row.p * t));
    CHECK(std::abs(res_bad[0]) > 0.5);

    // perturbing a_2 inflates the system residuals
    Polynomial<double> pert{1.0, 3.64836, 1.92310 + 1e-2};
    const auto res_pert = lagrange_residuals(pn, t, pert);
    double worst = 0, worst_pert = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        worst = std::max(worst, std::abs(res[i]));
        worst_pert = std::max(worst_pert, std::abs(res_pert[i]));
    }
    CHECK(worst_pert > 5.0 * worst);
}

TEST_CASE("analytic Jacobian of the system matches finite differences") {
    PNorm<double> pn(3.0);
    const int d = 4;
    detail::ExtremalSystem<double> sys(pn, d);
    std::vector<double> x{1.05, 2.0, 1.2, 0.7};  // (t, a_2, a_3, a_4)
    std::vector<double> F0;
    std::vector<std::vector<double>> J;
    sys.assemble(x, F0, &J);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        std::vector<double> Fp, Fm;
        sys.assemble(xp, Fp, nullptr);
        sys.assemble(xm, Fm, nullptr);
        for (std::size_t i = 0; i < F0.size(); ++i) {
            const double fd = (Fp[i] - Fm[i]) / (2 * h);
            CHECK(std::abs(J[i][j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("solve_extremal reproduces reference rows") {
    for (const Row& row : kRows) {
        PNorm<double> pn(row.p);
        const auto sol = solve_extremal(pn, row.d);
        CHECK(std::abs(1.0 / sol.t - row.inv_t) <= 1e-3);
        for (std::size_t k = 0; k < row.coeffs.size(); ++k)
            CHECK(std::abs(sol.a.coeff(static_cast<int>(k)) - row.coeffs[k]) <=
                  2e-3 * std::max(1.0, std::abs(row.coeffs[k])));
        CHECK(sol.meets_degree_hypothesis == (row.d > 2));
    }
}

TEST_CASE("degree-2 grid seeding selects the maximal root") {
    // the p = 4 system has a second positive root near t = 0.58; the solver
    // must return the larger minimizer instead
    const auto sol = solve_extremal(PNorm<double>(4.0), 2);
    CHECK(sol.t == doctest::Approx(1.0 / 1.09638).epsilon(1e-4));
    CHECK(sol.t > 0.9);
}

TEST_CASE("solution invariants along continuation chains") {
    for (double p : {4.0, 10.0}) {
        PNorm<double> pn(p);
        const auto chain = extremal_chain(pn, 5);
        REQUIRE(chain.size() == 4);
        double prev_t = 0.0;
        for (const auto& sol : chain) {
            CHECK(std::abs(sol.a.coeff(0) - 1.0) == 0.0);
            CHECK(std::abs(sol.a.coeff(1) - p * sol.t) <= 1e-9);
            for (int k = 0; k <= sol.d; ++k) CHECK(sol.a.coeff(k) > 0.0);
            CHECK(sol.a.coeff(sol.d) > 1e-12);
            double worst = 0;
            for (double r : sol.residuals) worst = std::max(worst, std::abs(r));
            CHECK(worst <= 1e-9 * sol.residual_scale);
            const double hs = std::max(1.0, h_prime_scale(sol.a, pn, sol.t));
            CHECK(std::abs(sol.hprime_at_t) <= 1e-8 * hs);  // vanishes without being imposed
            CHECK(sol.t > prev_t + 1e-9);  // strict growth in d
            prev_t = sol.t;
        }
    }
}

TEST_CASE("regression: higher-degree values at p = 4") {
    PNorm<double> pn(4.0);
    const auto chain = extremal_chain(pn, 6);
    CHECK(chain[3].t == doctest::Approx(1.156608).epsilon(2e-5));
    CHECK(chain[4].t == doctest::Approx(1.1769468).epsilon(2e-5));
}

TEST_CASE("seeded solves") {
    PNorm<double> pn(6.0);
    const auto base = solve_extremal(pn, 2);
    const auto next = solve_extremal(pn, 3, base);  // one continuation step
    CHECK(std::abs(1.0 / next.t - 0.82606) <= 1e-3);
    const auto again = solve_extremal(pn, 3, next);  // same-degree polish
    CHECK(again.t == doctest::Approx(next.t).epsilon(1e-10));
}

TEST_CASE("guards") {
    CHECK_THROWS_AS(solve_extremal(PNorm<double>(2.0), 3), UnsupportedExponent);
    CHECK_THROWS_AS(solve_extremal(PNorm<double>(4.0), 1), std::domain_error);
    CHECK_THROWS_AS(maximize_t_direct(PNorm<double>(2.0), 3, 4), UnsupportedExponent);
}

TEST_CASE("direct maximization agrees with the system solution") {
    for (double p : {4.0, 6.0}) {
        PNorm<double> pn(p);
        for (int d : {2, 3}) {
            const auto sol = solve_extremal(pn, d);
            const auto [t, a] = maximize_t_direct(pn, d, 16);
            CHECK(std::abs(t - sol.t) <= 1e-4);
            for (int k = 0; k <= a.degree(); ++k) CHECK(a.coeff(k) > 0.0);
        }
    }
}

TEST_CASE("extend_solution keeps the minimizer") {
    PNorm<double> pn(4.0);
    const auto sol = solve_extremal(pn, 2);
    CHECK(extend_solution(sol, 0).degree() == sol.a.degree());
    for (int m : {1, 3}) {
        const auto ext = extend_solution(sol, m);
        CHECK(ext.degree() == sol.d + m);
        // prefix is geometric in t, old block scaled by t^m
        CHECK(ext.coeff(0) == doctest::Approx(1.0));
        if (m > 1) CHECK(ext.coeff(1) == doctest::Approx(sol.t));
        const double t_ext = linear_opa_t(ext, pn);
        CHECK(std::abs(t_ext - sol.t) <= 1e-6);
    }
}
