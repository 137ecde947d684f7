#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opalab/lagrange.hpp"
#include "opalab/precision.hpp"
#include "opalab/radius.hpp"

namespace opalab {

/// Exponent grid of the bundled exclusion-radius table. The two
/// non-terminating entries are the exact rationals 5/3 and 11/6; their
/// reference s values match those, not the two-decimal displays.
inline std::vector<double> exclusion_grid() {
    return {1.5, 5.0 / 3.0, 1.75, 1.8, 11.0 / 6.0, 2.1, 4, 6, 8, 10, 12, 14, 16};
}

/// (d, p) grid of the bundled extremal table.
inline std::vector<std::pair<int, double>> extremal_grid() {
    std::vector<std::pair<int, double>> g;
    for (int d = 2; d <= 4; ++d)
        for (double p : {4.0, 6.0, 8.0, 10.0}) g.emplace_back(d, p);
    return g;
}

/// Even exponent grid of the bundled tau table.
inline std::vector<double> tau_grid() {
    return {4, 6, 8, 10, 12, 14, 16, 18, 20};
}

template <class Row>
struct TableOutcome {
    std::vector<Row> rows;
    std::vector<std::string> errors;  // per-row failures; rows holds the successes
    bool ok() const { return errors.empty(); }
};

inline TableOutcome<ExclusionResult<double>> compute_exclusion_table(const std::vector<double>& ps) {
    TableOutcome<ExclusionResult<double>> out;
    for (double p : ps) {
        try {
            out.rows.push_back(exclusion_radius(PNorm<double>(p)));
        } catch (const std::exception& e) {
            out.errors.push_back("p=" + std::to_string(p) + ": " + e.what());
        }
    }
    return out;
}

inline TableOutcome<LagrangeSolution<double>> compute_extremal_table(
    const std::vector<std::pair<int, double>>& grid, int precision_bits = 53, double tol = 1e-11) {
    TableOutcome<LagrangeSolution<double>> out;
    // Group by p so each exponent runs one continuation ladder.
    std::vector<double> ps;
    for (const auto& [d, p] : grid)
        if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
    for (double p : ps) {
        int d_max = 0;
        for (const auto& [d, q] : grid)
            if (q == p && d > d_max) d_max = d;
        try {
            auto chain = with_real_type(precision_bits, [&](auto tag) {
                using Real = typename decltype(tag)::type;
                SolverConfig<Real> cfg;
                cfg.tol = Real(tol);
                const auto solutions = extremal_chain(PNorm<Real>(Real(p)), d_max, cfg);
                std::vector<LagrangeSolution<double>> conv;
                for (const auto& s : solutions) {
                    LagrangeSolution<double> c;
                    c.p = static_cast<double>(s.p);
                    c.d = s.d;
                    c.t = static_cast<double>(s.t);
                    std::vector<double> coef;
                    for (int k = 0; k <= s.a.degree(); ++k)
                        coef.push_back(static_cast<double>(s.a.coeff(k)));
                    c.a = Polynomial<double>(coef);
                    for (const auto& r : s.residuals) c.residuals.push_back(static_cast<double>(r));
                    c.residual_scale = static_cast<double>(s.residual_scale);
                    c.hprime_at_t = static_cast<double>(s.hprime_at_t);
                    c.meets_degree_hypothesis = s.meets_degree_hypothesis;
                    conv.push_back(std::move(c));
                }
                return conv;
            });
            for (const auto& [d, q] : grid) {
                if (q != p) continue;
                out.rows.push_back(chain[static_cast<std::size_t>(d - 2)]);
            }
        } catch (const std::exception& e) {
            out.errors.push_back("p=" + std::to_string(p) + ": " + e.what());
        }
    }
    return out;
}

inline TableOutcome<TauResult<double>> compute_tau_table(const std::vector<double>& ps,
                                                         int precision_bits = 53) {
    TableOutcome<TauResult<double>> out;
    for (double p : ps) {
        try {
            // Extended precision opt-in matters most for large p, where the
            // fixed-point gap mixes very large and very small factors.
            TauResult<double> row = with_real_type(precision_bits, [&](auto tag) {
                using Real = typename decltype(tag)::type;
                const auto r = solve_tau(PNorm<Real>(Real(p)));
                TauResult<double> c;
                c.p = static_cast<double>(r.p);
                c.tau = static_cast<double>(r.tau);
                c.xi1 = static_cast<double>(r.xi1);
                c.xi2 = static_cast<double>(r.xi2);
                c.bracket_width = static_cast<double>(r.bracket_width);
                return c;
            });
            out.rows.push_back(row);
        } catch (const std::exception& e) {
            out.errors.push_back("p=" + std::to_string(p) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace opalab
