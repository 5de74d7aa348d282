#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ksigma/error.hpp"
#include "ksigma/io.hpp"

using namespace ksigma;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ksigma_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream os(p);
    os << s;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, 300.0 * u(rng));
        CHECK(std::stod(io::format_double(x)) == x);
    }
    CHECK(io::format_double(1.0) == "1.0000000000000000e+00");
}

TEST_CASE("CSV tables") {
    const auto p = scratch("t.csv");
    const std::vector<double> a{1.0 / 3.0, -2.5e-300, 7.0}, b{0.1, 0.2, 0.30000000000000004};
    io::write_csv(p, {"a", "b"}, {a, b});
    const auto t = io::read_csv(p);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.column("a") == a);
    CHECK(t.column("b") == b);
    CHECK(t.has("b"));
    CHECK_FALSE(t.has("c"));
    CHECK_THROWS_AS(t.column("c"), ConfigError);

    write_text(p, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(io::read_csv(p), ConfigError);
    write_text(p, "a,b\n1,x\n");
    CHECK_THROWS_AS(io::read_csv(p), ConfigError);
    CHECK_THROWS_AS(io::read_csv(scratch("missing.csv")), ConfigError);
}

TEST_CASE("profile CSV in either radial order") {
    const ConeParams cone(3, 2);
    const auto p = scratch("prof.csv");
    write_text(p, "r,w\n1.0,0.0\n0.5,-1.3862943611198906\n0.25,-2.772588722239781\n0.125,-4.1588830833596715\n");
    const auto prof = io::read_profile_csv(p, cone);
    CHECK(prof.r.front() == 0.125);
    CHECK(prof.w.back() == 0.0);
    CHECK_FALSE(prof.analytic);

    const auto q = scratch("prof2.csv");
    io::write_profile_csv(q, prof);
    const auto back = io::read_profile_csv(q, cone);
    CHECK(back.analytic);
    CHECK(back.dw == prof.dw);
}

TEST_CASE("problem files") {
    const auto good = io::parse_problem(io::json::parse(R"({
        "n": 3, "k": 2, "p": 4,
        "domain": {"type": "annulus", "r0": 1, "r1": 2, "bc": {"w_inner": 0.1, "w_outer": 0.6}},
        "rhs": {"form": "w_exponential", "f_table": [[1, 1], [2, 3]]},
        "solver": {"N": 64, "tol": 1e-9},
        "continuation": {"delta0": 0.5, "step": 0.01, "arclength": false}
    })"));
    CHECK(good.problem.domain == DomainKind::Annulus);
    CHECK(good.problem.w_inner == 0.1);
    CHECK(good.problem.w_outer == 0.6);
    CHECK(good.problem.form == RhsForm::WExponential);
    CHECK(good.problem.f(1.5) == doctest::Approx(2.0));
    CHECK(good.problem.f(5.0) == 3.0);
    CHECK(good.solver.N == 64);
    CHECK(good.continuation.delta0 == 0.5);
    CHECK_FALSE(good.continuation.config.arclength);
    CHECK_FALSE(good.continuation.general);

    const auto gen = io::parse_problem(io::json::parse(R"({
        "n": 3, "k": 2, "domain": {"type": "sphere_constant"}, "background": "round_sphere",
        "rhs": {"terms": [{"coeff": 1, "power": 3}, {"coeff": 1, "power": 5}], "growth": "vanishing_superlinear"}
    })"));
    REQUIRE(gen.continuation.general);
    CHECK(gen.continuation.general->growth == GrowthClass::VanishingSuperlinear);
    CHECK(gen.problem.form == RhsForm::VPower);

    const char* bad[] = {
        R"({"k": 2, "domain": {"type": "ball", "r1": 1}})",
        R"({"n": 3, "k": 2, "domain": {"type": "torus"}})",
        R"({"n": 3, "k": 2, "domain": {"type": "annulus", "r0": 2, "r1": 1}})",
        R"({"n": 3, "k": 2, "domain": {"type": "ball", "r1": 1}, "rhs": {"form": "u_power"}})",
        R"({"n": 3, "k": 2, "domain": {"type": "ball", "r1": 1}, "solver": {"N": 4}})",
        R"({"n": 3, "k": 2, "domain": {"type": "ball", "r1": 1}, "rhs": {"f_table": [[1, 1], [0.5, 2]]}})",
        R"({"n": 3, "k": 2, "domain": {"type": "annulus", "r0": 1, "r1": 2, "bc": [0, 1, 2]}})",
        R"({"n": 3, "k": 4, "domain": {"type": "ball", "r1": 1}})",
    };
    for (const char* s : bad) CHECK_THROWS_AS(io::parse_problem(io::json::parse(s)), ConfigError);
    CHECK_THROWS_AS(io::parse_problem(io::json::parse(R"({"n": 4, "k": 2, "domain": {"type": "ball", "r1": 1}})")),
                    UnsupportedRegime);
    const auto p = scratch("bad.json");
    write_text(p, "{ not json");
    CHECK_THROWS_AS(io::load_problem(p), ConfigError);
}

TEST_CASE("metric files") {
    const auto m = io::parse_metric(io::json::parse(R"({
        "n": 3, "w": {"type": "fundamental", "offset": 1.5}, "center": "infinity",
        "radii": {"r_min": 1, "r_max": 3, "count": 5}
    })"));
    CHECK(m.radii == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK(m.center == VolumeCenter::Infinity);
    CHECK(m.w(2.0) == doctest::Approx(2 * std::log(2.0) + 1.5));
    CHECK(io::parse_metric(io::json::parse(R"({"n": 3, "w": {"type": "round_sphere"}, "radii": [0.5]})")).w(1.0) == 0.0);
    CHECK_THROWS_AS(io::parse_metric(io::json::parse(R"({"n": 3, "w": {"type": "hyperbolic"}, "radii": [1]})")),
                    ConfigError);
    CHECK_THROWS_AS(
        io::parse_metric(io::json::parse(R"({"n": 3, "w": {"type": "flat"}, "center": "north", "radii": [1]})")),
        ConfigError);
}

TEST_CASE("manifest and solution outputs") {
    io::RunManifest m;
    m.command = "solve";
    m.inputs = {"a.json"};
    m.seed = 11;
    const auto j = m.to_json();
    for (const char* key : {"command", "config_path", "inputs", "outputs", "seed", "version"}) CHECK(j.contains(key));
    CHECK(j["version"] == io::tool_version());

    Solution s;
    s.r = {1.0, 2.0};
    s.w = {0.0, 2.0};
    s.residual = {0.0, 1e-12};
    const auto p = scratch("sol.csv");
    io::write_solution_csv(p, s, ConeParams(3, 2));
    const auto t = io::read_csv(p);
    CHECK(t.header == std::vector<std::string>{"r", "w", "v", "residual"});
    CHECK(t.column("v")[1] == doctest::Approx(std::exp(-1.0)));
}
