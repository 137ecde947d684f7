#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opalab/io.hpp"
#include "opalab/precision.hpp"
#include "opalab/tables.hpp"
#include "opalab/verify.hpp"

namespace opalab {

/// Parsed command-line run description. Exit codes: 0 success,
/// 1 verification/solver failure, 2 usage error.
struct RunConfig {
    enum class Command { opa, extremal, tau, exclusion, examples, orbit, verify, tables };
    enum class Format { json, csv, text };

    Command command = Command::tables;
    std::vector<double> p_values;
    int d_lo = 2, d_hi = 4;          // extremal degree range
    int degree = 1;                  // approximant degree for `opa`
    double tol = 1e-11;
    bool tol_given = false;
    int precision_bits = 53;
    Format format = Format::text;
    std::optional<std::string> out_path;
    int budget = 40;
    int restarts = 32;
    int cap = 5000;
    double t_param = 0.0;
    bool t_given = false;
    int from_extremal_d = 0;
    double x1 = 0.0;
    bool x1_given = false;
    std::vector<double> coeffs;
};

namespace cli_detail {

inline bool valid_p(double p) { return std::isfinite(p) && p > 1.0; }

inline int usage_error(std::ostream& err, const std::string& msg) {
    err << "error: " << msg << "\n";
    return 2;
}

/// Accepts "3" or "2..5".
inline bool parse_degree_range(const std::string& s, int& lo, int& hi) {
    const auto pos = s.find("..");
    try {
        if (pos == std::string::npos) {
            lo = hi = std::stoi(s);
        } else {
            lo = std::stoi(s.substr(0, pos));
            hi = std::stoi(s.substr(pos + 2));
        }
    } catch (...) {
        return false;
    }
    return lo >= 2 && hi >= lo;
}

inline std::ostream& open_sink(const std::optional<std::string>& path, std::ofstream& file,
                               std::ostream& fallback) {
    if (!path) return fallback;
    file.open(*path, std::ios::binary);
    return file;
}

template <class Row, class ToJson, class ToText>
void emit_rows(std::ostream& os, RunConfig::Format fmt, const std::vector<Row>& rows,
               const std::string& csv_header, ToJson&& to_json_fn, ToText&& to_text_fn) {
    if (fmt == RunConfig::Format::json) {
        for (const auto& r : rows) os << to_json_fn(r).dump() << '\n';
    } else if (fmt == RunConfig::Format::csv) {
        os << csv_header << '\n';
        for (const auto& r : rows) os << to_text_fn(r, true) << '\n';
    } else {
        for (const auto& r : rows) os << to_text_fn(r, false) << '\n';
    }
}

inline int cmd_exclusion(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto ps = cfg.p_values.empty() ? exclusion_grid() : cfg.p_values;
    auto table = compute_exclusion_table(ps);
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file, out);
    emit_rows(
        os, cfg.format, table.rows, "p,s,r",
        [](const ExclusionResult<double>& r) { return to_json_record(r); },
        [](const ExclusionResult<double>& r, bool as_csv) {
            std::ostringstream line;
            if (as_csv)
                line << csv::num(r.p) << ',' << csv::num(r.s_min) << ',' << csv::num(r.r);
            else
                line << "p = " << r.p << "  s = " << r.s_min << "  r = " << r.r;
            return line.str();
        });
    for (const auto& e : table.errors) err << "exclusion: " << e << '\n';
    return table.ok() ? 0 : 1;
}

inline int cmd_tau(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto ps = cfg.p_values.empty() ? tau_grid() : cfg.p_values;
    auto table = compute_tau_table(ps, cfg.precision_bits);
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file, out);
    emit_rows(
        os, cfg.format, table.rows, "p,tau",
        [](const TauResult<double>& r) { return to_json_record(r); },
        [](const TauResult<double>& r, bool as_csv) {
            std::ostringstream line;
            if (as_csv)
                line << csv::num(r.p) << ',' << csv::num(r.tau);
            else
                line << "p = " << r.p << "  tau = " << r.tau << "  (xi1 = " << r.xi1
                     << ", xi2 = " << r.xi2 << ")";
            return line.str();
        });
    for (const auto& e : table.errors) err << "tau: " << e << '\n';
    return table.ok() ? 0 : 1;
}

inline int cmd_extremal(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<double> ps = cfg.p_values.empty() ? std::vector<double>{4, 6, 8, 10} : cfg.p_values;
    std::vector<std::pair<int, double>> grid;
    for (double p : ps)
        for (int d = cfg.d_lo; d <= cfg.d_hi; ++d) grid.emplace_back(d, p);
    auto table = compute_extremal_table(grid, cfg.precision_bits, cfg.tol);
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file, out);
    if (cfg.format == RunConfig::Format::csv) {
        write_extremal_csv(os, table.rows);
    } else {
        emit_rows(
            os, cfg.format, table.rows, "",
            [](const LagrangeSolution<double>& s) { return to_json_record(s); },
            [](const LagrangeSolution<double>& s, bool) {
                std::ostringstream line;
                line << "d = " << s.d << "  p = " << s.p << "  1/t = " << 1.0 / s.t << "  f = " << s.a;
                return line.str();
            });
    }
    for (const auto& e : table.errors) err << "extremal: " << e << '\n';
    return table.ok() ? 0 : 1;
}

inline int cmd_examples(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto ps = cfg.p_values.empty() ? std::vector<double>{1.5, 1.75, 3, 4, 6} : cfg.p_values;
    bool all_ok = true;
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file, out);
    for (double p : ps) {
        try {
            PNorm<double> pn(p);
            WitnessSearchConfig<double> wcfg;
            wcfg.k_cap = cfg.cap;
            const auto w = find_min_k_extra_zero(pn, wcfg);
            if (cfg.format == RunConfig::Format::json)
                os << to_json_record(w, p).dump() << '\n';
            else
                os << "p = " << p << "  k = " << w.k << "  zero = " << w.zero << '\n';
        } catch (const std::exception& e) {
            err << "examples: p=" << p << ": " << e.what() << '\n';
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

inline int cmd_opa(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.coeffs.empty()) return usage_error(err, "opa: coefficient list required after --");
    if (cfg.p_values.size() != 1) return usage_error(err, "opa: exactly one --p value required");
    const double p = cfg.p_values[0];
    Polynomial<double> f;
    try {
        f = Polynomial<double>(cfg.coeffs);
    } catch (const std::exception& e) {
        return usage_error(err, std::string("opa: ") + e.what());
    }
    PNorm<double> pn(p);
    SolverConfig<double> scfg;
    scfg.tol = cfg.tol;
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file, out);
    try {
        const auto res = solve_opa(f, pn, cfg.degree, scfg);
        if (cfg.format == RunConfig::Format::json) {
            auto j = to_json_record(res, p, cfg.degree);
            if (cfg.degree == 1) {
                const auto lin = solve_linear_opa(f, pn, scfg);
                j["linear"] = to_json_record(lin, p);
            }
            os << j.dump() << '\n';
        } else {
            os << "q = " << res.q << '\n';
            os << "residual norm = " << res.residual_norm << '\n';
            os << "orth residuals =";
            for (double v : res.orth_residuals) os << ' ' << v;
            os << '\n' << "zeros =";
            for (double v : res.zeros) os << ' ' << v;
            os << '\n';
        }
        return 0;
    } catch (const ZeroAtOrigin&) {
        // Documented behavior, not a failure: f(0) = 0 forces the zero approximant.
        os << "f(0) = 0: the optimal approximant is identically zero for every degree\n";
        return 0;
    }
}

inline int cmd_orbit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.p_values.size() != 1) return usage_error(err, "orbit: exactly one --p value required");
    const double p = cfg.p_values[0];
    PNorm<double> pn(p);
    double t = cfg.t_param;
    if (cfg.from_extremal_d >= 2) {
        t = solve_extremal(pn, cfg.from_extremal_d).t;
    } else if (!cfg.t_given) {
        return usage_error(err, "orbit: provide --t or --from-extremal");
    }
    PhiPsiParams<double> prm(pn, t);
    const double x1 = cfg.x1_given ? cfg.x1 : p * t;
    BranchPolicy policy;
    OrbitTrace<double> trace;
    try {
        trace = iterate_orbit(prm, x1, policy, cfg.budget);
    } catch (const BranchMiss& e) {
        err << "orbit: " << e.what() << '\n';
        return 1;
    }
    const std::string prefix = cfg.out_path.value_or("cobweb");
    const CobwebData data = export_cobweb(trace, prm);
    {
        std::ofstream curves(prefix + "_curves.csv", std::ios::binary);
        write_cobweb_curves_csv(curves, data);
        std::ofstream segments(prefix + "_segments.csv", std::ios::binary);
        write_cobweb_segments_csv(segments, data);
    }
    if (cfg.format == RunConfig::Format::json)
        out << to_json_record(trace, prm).dump() << '\n';
    else
        out << "status = " << orbit_status_name(trace.status) << "  steps = " << trace.ratios.size()
            << "  files = " << prefix << "_curves.csv, " << prefix << "_segments.csv" << '\n';
    return 0;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    VerifyOptions vopts;
    if (cfg.tol_given) vopts.tol_override = cfg.tol;
    vopts.p_filter = cfg.p_values;
    vopts.restarts = cfg.restarts;
    const auto results = run_verification(vopts);
    bool all = true;
    for (const auto& r : results) {
        out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  " << r.detail << '\n';
        all = all && r.pass;
    }
    out << (all ? "all checks passed" : "some checks FAILED") << " (" << results.size() << " run)\n";
    return all ? 0 : 1;
}

inline int cmd_tables(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.out_path.value_or(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    const bool json = cfg.format == RunConfig::Format::json;
    const std::string ext = json ? ".jsonl" : ".csv";
    bool ok = true;

    {
        const auto ps = cfg.p_values.empty() ? exclusion_grid() : cfg.p_values;
        auto table = compute_exclusion_table(ps);
        std::ofstream os(dir / ("exclusion" + ext), std::ios::binary);
        if (json)
            for (const auto& r : table.rows) os << to_json_record(r).dump() << '\n';
        else
            write_exclusion_csv(os, table.rows);
        for (const auto& e : table.errors) err << "tables/exclusion: " << e << '\n';
        ok = ok && table.ok();
    }
    {
        std::vector<std::pair<int, double>> grid;
        if (cfg.p_values.empty()) {
            grid = extremal_grid();
        } else {
            for (double p : cfg.p_values)
                for (int d = cfg.d_lo; d <= cfg.d_hi; ++d) grid.emplace_back(d, p);
        }
        auto table = compute_extremal_table(grid, cfg.precision_bits, cfg.tol);
        std::ofstream os(dir / ("extremal" + ext), std::ios::binary);
        if (json)
            for (const auto& r : table.rows) os << to_json_record(r).dump() << '\n';
        else
            write_extremal_csv(os, table.rows);
        for (const auto& e : table.errors) err << "tables/extremal: " << e << '\n';
        ok = ok && table.ok();
    }
    {
        std::vector<double> ps;
        if (cfg.p_values.empty()) {
            ps = tau_grid();
        } else {
            for (double p : cfg.p_values)
                if (std::abs(p - 2.0) > 1e-6) ps.push_back(p);
        }
        auto table = compute_tau_table(ps, cfg.precision_bits);
        std::ofstream os(dir / ("tau" + ext), std::ios::binary);
        if (json)
            for (const auto& r : table.rows) os << to_json_record(r).dump() << '\n';
        else
            write_tau_csv(os, table.rows);
        for (const auto& e : table.errors) err << "tables/tau: " << e << '\n';
        ok = ok && table.ok();
    }
    out << "tables written to " << dir.string() << '\n';
    return ok ? 0 : 1;
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using cli_detail::usage_error;
    RunConfig cfg;

    CLI::App app{"optimal polynomial approximants in lp coefficient space"};
    app.require_subcommand(1);

    std::string format_str = "text";
    std::string d_range = "2..4";
    auto add_common = [&](CLI::App* sub, bool multi_p) {
        if (multi_p)
            sub->add_option("--p", cfg.p_values, "exponent(s) p in (1, inf)");
        else
            sub->add_option("--p", cfg.p_values, "exponent p in (1, inf)")->expected(1);
        sub->add_option("--tol", cfg.tol, "solver tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--precision-bits", cfg.precision_bits,
                        "scalar precision: 53, 128, 256 or 512")
            ->envname("OPA_LAB_PRECISION_BITS");
        sub->add_option("--format", format_str, "output format: json, csv or text")
            ->check(CLI::IsMember({"json", "csv", "text"}));
        sub->add_option("--out", cfg.out_path, "output path (directory for `tables`)");
    };

    auto* tables = app.add_subcommand("tables", "write the exclusion, extremal and tau tables");
    add_common(tables, true);
    tables->add_option("--d", d_range, "degree or range (e.g. 3 or 2..5)");

    auto* opa = app.add_subcommand("opa", "optimal polynomial approximant of 1/f");
    add_common(opa, false);
    opa->add_option("--degree", cfg.degree, "approximant degree")->check(CLI::NonNegativeNumber);
    opa->add_option("coeffs", cfg.coeffs, "coefficients of f, lowest order first (after --)");

    auto* extremal = app.add_subcommand("extremal", "extremal coefficient systems T_{d,p}");
    add_common(extremal, true);
    extremal->add_option("--d", d_range, "degree or range (e.g. 3 or 2..5)");

    auto* tau = app.add_subcommand("tau", "critical radius constants");
    add_common(tau, true);

    auto* exclusion = app.add_subcommand("exclusion", "excluded-disk radii");
    add_common(exclusion, true);

    auto* examples = app.add_subcommand("examples", "minimal interior-zero witnesses");
    add_common(examples, true);
    examples->add_option("--cap", cfg.cap, "family index cap")->check(CLI::PositiveNumber);

    auto* orbit = app.add_subcommand("orbit", "iterate the ratio system and dump cobweb data");
    add_common(orbit, false);
    auto* t_opt = orbit->add_option("--t", cfg.t_param, "multiplier t > 0");
    orbit->add_option("--from-extremal", cfg.from_extremal_d,
                      "use t from the solved degree-d extremal system");
    auto* x1_opt = orbit->add_option("--x1", cfg.x1, "start abscissa (default p t)");
    orbit->add_option("--budget", cfg.budget, "maximum orbit steps")->check(CLI::NonNegativeNumber);

    auto* verify = app.add_subcommand("verify", "run the cross-module invariant batteries");
    add_common(verify, true);
    cfg.restarts = 8;
    verify->add_option("--restarts", cfg.restarts, "multistart budget of the direct maximizer");

    std::vector<const char*> argv;
    argv.push_back("opalab");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    for (const CLI::App* sub : app.get_subcommands())
        if (sub->count("--tol")) cfg.tol_given = true;
    cfg.t_given = t_opt->count() > 0;
    cfg.x1_given = x1_opt->count() > 0;

    if (format_str == "json")
        cfg.format = RunConfig::Format::json;
    else if (format_str == "csv")
        cfg.format = RunConfig::Format::csv;
    else
        cfg.format = RunConfig::Format::text;

    for (double p : cfg.p_values)
        if (!cli_detail::valid_p(p)) return usage_error(err, "every p must be finite and > 1");
    if (!(cfg.tol > 0)) return usage_error(err, "tol must be positive");
    if (!precision_bits_supported(cfg.precision_bits))
        return usage_error(err, "precision-bits must be one of 53, 128, 256, 512 (and MPFR available)");
    if (!cli_detail::parse_degree_range(d_range, cfg.d_lo, cfg.d_hi))
        return usage_error(err, "bad --d value; expected N or N..M with N >= 2");

    try {
        if (tables->parsed()) {
            cfg.command = RunConfig::Command::tables;
            return cli_detail::cmd_tables(cfg, out, err);
        }
        if (opa->parsed()) {
            cfg.command = RunConfig::Command::opa;
            return cli_detail::cmd_opa(cfg, out, err);
        }
        if (extremal->parsed()) {
            cfg.command = RunConfig::Command::extremal;
            return cli_detail::cmd_extremal(cfg, out, err);
        }
        if (tau->parsed()) {
            cfg.command = RunConfig::Command::tau;
            return cli_detail::cmd_tau(cfg, out, err);
        }
        if (exclusion->parsed()) {
            cfg.command = RunConfig::Command::exclusion;
            return cli_detail::cmd_exclusion(cfg, out, err);
        }
        if (examples->parsed()) {
            cfg.command = RunConfig::Command::examples;
            return cli_detail::cmd_examples(cfg, out, err);
        }
        if (orbit->parsed()) {
            cfg.command = RunConfig::Command::orbit;
            return cli_detail::cmd_orbit(cfg, out, err);
        }
        cfg.command = RunConfig::Command::verify;
        return cli_detail::cmd_verify(cfg, out, err);
    } catch (const std::domain_error& e) {
        return usage_error(err, e.what());
    } catch (const std::invalid_argument& e) {
        return usage_error(err, e.what());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace opalab
