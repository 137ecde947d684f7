#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "opalab/cli.hpp"
#include "opalab/io.hpp"

using namespace opalab;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("json round trip is byte-identical and value-exact") {
    PNorm<double> pn(4.0);
    const auto lin = solve_linear_opa(Polynomial<double>{1.0, 0.7, -0.3}, pn);
    const auto j = to_json_record(lin, 4.0);
    const std::string s1 = j.dump();
    auto parsed = nlohmann::json::parse(s1);
    CHECK(parsed.dump() == s1);
    CHECK(parsed["t"].get<double>() == lin.t);
    CHECK(parsed["c"].get<double>() == lin.c);

    const auto sol = solve_extremal(pn, 2);
    const auto js = to_json_record(sol);
    auto parsed2 = nlohmann::json::parse(js.dump());
    CHECK(parsed2.dump() == js.dump());
    CHECK(parsed2["t"].get<double>() == sol.t);
    CHECK(parsed2["inv_t"].get<double>() == 1.0 / sol.t);
}

TEST_CASE("csv writers emit headers and LF endings") {
    std::ostringstream os;
    write_exclusion_csv(os, std::vector<ExclusionResult<double>>{{4.0, 1.5789, 0.633368}});
    const std::string text = os.str();
    CHECK(text.rfind("p,s,r\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
}

TEST_CASE("cli: opa solves and reports the root") {
    const auto r = run({"opa", "--p", "2", "--degree", "1", "--format", "json", "--", "1", "1"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["zeros"].size() == 1);
    CHECK(std::abs(j["zeros"][0].get<double>() - 2.0) <= 1e-9);
    CHECK(std::abs(j["linear"]["zero"].get<double>() - 2.0) <= 1e-9);
}

TEST_CASE("cli: opa handles the zero-at-origin case as documented behavior") {
    const auto r = run({"opa", "--p", "4", "--degree", "3", "--format", "text", "--", "0", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("identically zero") != std::string::npos);
}

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(run({"opa", "--p", "0.5", "--", "1", "1"}).code == 2);        // p <= 1
    CHECK(run({"opa", "--p", "2"}).code == 2);                           // no coefficients
    CHECK(run({"tau", "--p", "4", "--precision-bits", "77"}).code == 2); // bad width
    CHECK(run({"extremal", "--d", "oops"}).code == 2);                   // bad range
    CHECK(run({"nonsense"}).code == 2);                                  // unknown command
    CHECK(run({"tau", "--tol", "-1"}).code == 2);                        // bad tolerance
}

TEST_CASE("cli: exclusion honors the p list") {
    const auto r = run({"exclusion", "--p", "1.5", "--p", "1.75", "--format", "json"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(lines, line))
        if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(rows[0]["s"].get<double>() - 1.21141) <= 5e-5);
    CHECK(std::abs(rows[1]["s"].get<double>() - 1.07929) <= 5e-5);
}

TEST_CASE("cli: tau single value") {
    const auto r = run({"tau", "--p", "4", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["tau"].get<double>() - 1.21157) <= 2e-4);
}

TEST_CASE("cli: examples reports the minimal witness") {
    const auto r = run({"examples", "--p", "4", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["k"].get<int>() == 2);
    CHECK(j["inside_disk"].get<bool>());
    CHECK(std::abs(j["zero"].get<double>()) < 1.0);
}

TEST_CASE("cli: examples near p = 2 fails with a solver error") {
    const auto r = run({"examples", "--p", "2.0000001"});
    CHECK(r.code == 1);
    CHECK(r.err.find("p = 2") != std::string::npos);
}

TEST_CASE("cli: orbit writes cobweb files") {
    const fs::path dir = fs::temp_directory_path() / "opalab_orbit_test";
    fs::create_directories(dir);
    const std::string prefix = (dir / "run").string();
    const auto r = run({"orbit", "--p", "4", "--from-extremal", "3", "--budget", "40",
                        "--format", "json", "--out", prefix});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["status"].get<std::string>() == "terminated-at-exit");
    CHECK(j["ratios"].size() == 3);
    const std::string curves = slurp(prefix + "_curves.csv");
    CHECK(curves.rfind("x,phi,psi\n", 0) == 0);
    const std::string segments = slurp(prefix + "_segments.csv");
    CHECK(segments.rfind("x0,y0,x1,y1,kind\n", 0) == 0);
    CHECK(segments.find("horizontal") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: tables writes three files and partial output survives failures") {
    const fs::path dir = fs::temp_directory_path() / "opalab_tables_test";
    fs::remove_all(dir);
    const auto r = run({"tables", "--p", "4", "--d", "2..3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "exclusion.csv"));
    CHECK(fs::exists(dir / "extremal.csv"));
    CHECK(fs::exists(dir / "tau.csv"));
    const std::string extremal = slurp(dir / "extremal.csv");
    CHECK(extremal.rfind("d,p,inv_t,coeffs\n", 0) == 0);
    CHECK(extremal.find("\n2,4.0,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: verify restricted to p = 2 passes the applicable checks") {
    const auto r = run({"verify", "--p", "2", "--restarts", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("opa/p2-closed-form") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: verify with an impossible tolerance fails loudly") {
    const auto r = run({"verify", "--p", "2", "--restarts", "2", "--tol", "1e-20"});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
}
