#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opalab/dynamics.hpp"
#include "opalab/families.hpp"
#include "opalab/lagrange.hpp"
#include "opalab/opa.hpp"
#include "opalab/radius.hpp"

namespace opalab {

// JSON records use nlohmann's shortest round-trip float formatting, so a
// dump -> parse -> dump cycle is byte-identical. Table reproduction is
// always compared numerically, never textually.

template <class Real>
nlohmann::json to_json_record(const LinearOpaResult<Real>& r, const Real& p) {
    nlohmann::json j;
    j["p"] = static_cast<double>(p);
    j["t"] = static_cast<double>(r.t);
    if (r.zero)
        j["zero"] = static_cast<double>(*r.zero);
    else
        j["zero"] = nullptr;
    j["c"] = static_cast<double>(r.c);
    j["j1_norm"] = static_cast<double>(r.j1_norm);
    j["residual"] = static_cast<double>(r.residual);
    return j;
}

template <class Real>
nlohmann::json to_json_record(const OpaResult<Real>& r, const Real& p, int degree) {
    nlohmann::json j;
    j["p"] = static_cast<double>(p);
    j["degree"] = degree;
    std::vector<double> q;
    for (int k = 0; k <= r.q.degree(); ++k) q.push_back(static_cast<double>(r.q.coeff(k)));
    j["q"] = q;
    j["residual_norm"] = static_cast<double>(r.residual_norm);
    std::vector<double> res;
    for (const Real& v : r.orth_residuals) res.push_back(static_cast<double>(v));
    j["orth_residuals"] = res;
    std::vector<double> zs;
    for (const Real& v : r.zeros) zs.push_back(static_cast<double>(v));
    j["zeros"] = zs;
    return j;
}

template <class Real>
nlohmann::json to_json_record(const LagrangeSolution<Real>& s) {
    nlohmann::json j;
    j["p"] = static_cast<double>(s.p);
    j["d"] = s.d;
    j["t"] = static_cast<double>(s.t);
    j["inv_t"] = static_cast<double>(Real(1) / s.t);
    std::vector<double> c;
    for (int k = 0; k <= s.a.degree(); ++k) c.push_back(static_cast<double>(s.a.coeff(k)));
    j["coeffs"] = c;
    Real worst(0);
    for (const Real& r : s.residuals) worst = max_value(worst, abs_value(r));
    j["residual_max"] = static_cast<double>(worst);
    return j;
}

template <class Real>
nlohmann::json to_json_record(const TauResult<Real>& r) {
    nlohmann::json j;
    j["p"] = static_cast<double>(r.p);
    j["tau"] = static_cast<double>(r.tau);
    j["xi1"] = static_cast<double>(r.xi1);
    j["xi2"] = static_cast<double>(r.xi2);
    return j;
}

template <class Real>
nlohmann::json to_json_record(const ExclusionResult<Real>& r) {
    nlohmann::json j;
    j["p"] = static_cast<double>(r.p);
    j["s"] = static_cast<double>(r.s_min);
    j["r"] = static_cast<double>(r.r);
    return j;
}

template <class Real>
nlohmann::json to_json_record(const ExtraZeroWitness<Real>& w, const Real& p) {
    nlohmann::json j;
    j["p"] = static_cast<double>(p);
    j["k"] = w.k;
    std::vector<double> c;
    for (int i = 0; i <= w.f.degree(); ++i) c.push_back(static_cast<double>(w.f.coeff(i)));
    j["coeffs"] = c;
    j["zero"] = static_cast<double>(w.zero);
    j["inside_disk"] = w.inside_disk;
    return j;
}

template <class Real>
nlohmann::json to_json_record(const OrbitTrace<Real>& tr, const PhiPsiParams<Real>& prm) {
    nlohmann::json j;
    j["p"] = static_cast<double>(prm.p.p());
    j["t"] = static_cast<double>(prm.t);
    j["status"] = orbit_status_name(tr.status);
    std::vector<double> rs;
    for (const Real& v : tr.ratios) rs.push_back(static_cast<double>(v));
    j["ratios"] = rs;
    if (tr.exit_x)
        j["exit_x"] = static_cast<double>(*tr.exit_x);
    else
        j["exit_x"] = nullptr;
    return j;
}

// CSV: UTF-8, header row, LF line endings.

namespace csv {

inline std::string num(double v) {
    return nlohmann::json(v).dump();
}

}  // namespace csv

template <class Real>
void write_exclusion_csv(std::ostream& os, const std::vector<ExclusionResult<Real>>& rows) {
    os << "p,s,r\n";
    for (const auto& r : rows)
        os << csv::num(static_cast<double>(r.p)) << ',' << csv::num(static_cast<double>(r.s_min))
           << ',' << csv::num(static_cast<double>(r.r)) << '\n';
}

/// Extremal table in the reference layout d | p | 1/t | coefficients; the
/// coefficient list is space-separated inside the final field.
template <class Real>
void write_extremal_csv(std::ostream& os, const std::vector<LagrangeSolution<Real>>& rows) {
    os << "d,p,inv_t,coeffs\n";
    for (const auto& s : rows) {
        os << s.d << ',' << csv::num(static_cast<double>(s.p)) << ','
           << csv::num(static_cast<double>(Real(1) / s.t)) << ',';
        for (int k = 0; k <= s.a.degree(); ++k) {
            if (k) os << ' ';
            os << csv::num(static_cast<double>(s.a.coeff(k)));
        }
        os << '\n';
    }
}

template <class Real>
void write_tau_csv(std::ostream& os, const std::vector<TauResult<Real>>& rows) {
    os << "p,tau\n";
    for (const auto& r : rows)
        os << csv::num(static_cast<double>(r.p)) << ',' << csv::num(static_cast<double>(r.tau))
           << '\n';
}

inline void write_cobweb_curves_csv(std::ostream& os, const CobwebData& data) {
    os << "x,phi,psi\n";
    for (const auto& c : data.curves)
        os << csv::num(c.x) << ',' << csv::num(c.phi) << ',' << csv::num(c.psi) << '\n';
}

inline void write_cobweb_segments_csv(std::ostream& os, const CobwebData& data) {
    os << "x0,y0,x1,y1,kind\n";
    for (const auto& s : data.segments)
        os << csv::num(s.x0) << ',' << csv::num(s.y0) << ',' << csv::num(s.x1) << ','
           << csv::num(s.y1) << ',' << (s.vertical ? "vertical" : "horizontal") << '\n';
}

}  // namespace opalab
