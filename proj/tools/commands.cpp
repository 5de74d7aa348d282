#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ksigma/analysis.hpp"
#include "ksigma/continuation.hpp"
#include "ksigma/error.hpp"
#include "ksigma/io.hpp"
#include "ksigma/radial.hpp"
#include "ksigma/solver.hpp"

namespace ksigma::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string cell;
    while (std::getline(is, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw ConfigError("malformed number '" + cell + "'");
        }
        if (cell.find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("malformed number '" + cell + "'");
        out.push_back(v);
    }
    return out;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

io::RunManifest manifest(const std::string& command, const std::string& config,
                         std::vector<std::string> inputs, std::vector<std::string> outputs,
                         std::uint64_t seed = 0) {
    io::RunManifest m;
    m.command = command;
    m.config_path = config;
    m.inputs = std::move(inputs);
    m.outputs = std::move(outputs);
    m.seed = seed;
    return m;
}

void emit(const json& j, const std::string& path) {
    std::cout << j.dump(2) << '\n';
    if (!path.empty()) io::write_json(path, j);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

// ------------------------------------------------------------------ sigma

int cmd_sigma(const SigmaArgs& a) {
    std::vector<std::vector<double>> tuples;
    if (!a.lambda.empty()) tuples.push_back(parse_list(a.lambda));
    if (!a.csv.empty()) {
        const auto table = io::read_csv(a.csv);
        const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<double> lam;
            for (const auto& col : table.columns) lam.push_back(col[i]);
            tuples.push_back(std::move(lam));
        }
    }
    if (tuples.empty()) throw ConfigError("supply --lambda or --csv");

    json results = json::array();
    for (const auto& lam : tuples) {
        const int n = int(lam.size());
        if (n < 2) throw ConfigError("lambda needs at least two entries");
        if (a.k < 1 || a.k > n) throw ConfigError("k must lie in [1, n]");
        for (double x : lam)
            if (!std::isfinite(x)) throw ConfigError("lambda entries must be finite");
        const EigenTuple t(lam);
        const auto s = sigma_all(lam, a.k);
        json row;
        row["lambda"] = lam;
        row["sigma"] = std::vector<double>(s.begin() + 1, s.end());
        for (int j = 1; j <= a.k; ++j) std::cout << "sigma_" << j << " = " << std::setprecision(17) << s[j] << '\n';

        bool open = true, closed = true;
        for (int j = 1; j <= a.k; ++j) {
            open = open && s[j] > 0.0;
            closed = closed && s[j] >= 0.0;
        }
        row["in_gamma_k"] = open;
        row["in_gamma_k_closure"] = closed;
        std::cout << "in Gamma_" << a.k << ": " << (open ? "true" : "false") << '\n';
        std::cout << "in closure of Gamma_" << a.k << ": " << (closed ? "true" : "false") << '\n';
        if (a.k >= 2 && n >= 3 && a.k < n) {
            const double delta = ConeParams(n, a.k).delta_gv();
            const bool sd = in_sigma_delta(t, delta);
            row["delta"] = delta;
            row["in_sigma_delta"] = sd;
            std::cout << "in Sigma_delta (delta = " << delta << "): " << (sd ? "true" : "false") << '\n';
        }
        results.push_back(row);
    }
    if (!a.json_out.empty()) {
        json out;
        out["results"] = results;
        std::vector<std::string> inputs;
        if (!a.csv.empty()) inputs.push_back(a.csv);
        out["manifest"] = manifest("sigma", "", inputs, {a.json_out}).to_json();
        io::write_json(a.json_out, out);
    }
    return kOk;
}

// --------------------------------------------------------------- classify

int cmd_classify(const ClassifyArgs& a) {
    const ConeParams cone(a.n, a.k);
    const RadialProfile p = io::read_profile_csv(a.profile, cone);
    p.validate();
    const auto adm = profile_admissibility(p, false, a.c_fd);
    const auto ab = ab_reduce(p);
    std::size_t bad = 0;
    for (bool ok : adm) bad += ok ? 0 : 1;
    if (bad > 0) {
        std::cerr << "profile is not admissible at " << bad << " of " << adm.size() << " nodes\n";
        int shown = 0;
        for (std::size_t i = 0; i < adm.size() && shown < 10; ++i) {
            if (adm[i]) continue;
            std::cerr << "  r = " << p.r[i] << "  b = " << ab.b[i]
                      << "  a + theta b = " << ab.a[i] + cone.theta() * ab.b[i] << '\n';
            ++shown;
        }
        return kBadInput;
    }
    ClassifyOptions opt;
    opt.eps_class = a.eps_class;
    opt.c_fd = a.c_fd;
    const auto rep = classify_singularity(p, opt);
    json j;
    j["class"] = to_string(rep.kind);
    j["offset"] = rep.offset;
    j["offset_spread"] = rep.offset_spread;
    j["alpha_est"] = rep.alpha_est;
    j["alpha_saturated"] = rep.alpha_saturated;
    j["alpha_sharp"] = cone.alpha();
    j["rw_limit"] = rep.rw_limit;
    j["fitted_slope"] = rep.fitted_slope;
    j["fit_rms"] = rep.fit_rms;
    j["fit_nodes"] = rep.fit_nodes;
    std::vector<std::string> outs;
    if (!a.json_out.empty()) outs.push_back(a.json_out);
    j["manifest"] = manifest("classify", "", {a.profile}, outs).to_json();
    emit(j, a.json_out);
    return kOk;
}

// ------------------------------------------------------------------ solve

int cmd_solve(const SolveArgs& a) {
    const io::ProblemSpec spec = io::load_problem(a.problem);
    const RadialProblem& prob = spec.problem;
    const fs::path dir = prepare_dir(a.out_dir);
    const fs::path csv = dir / "solution.csv", summary = dir / "summary.json";

    json j;
    j["n"] = prob.cone.n;
    j["k"] = prob.cone.k;
    j["p"] = prob.p;
    j["domain"] = to_string(prob.domain);
    Solution sol;
    const bool eigen = prob.domain == DomainKind::SphereConstant && !prob.phi_override &&
                       std::abs(prob.p - prob.cone.k) < 1e-14;
    if (eigen) {
        const auto res = solve_eigenvalue(prob, spec.solver, a.levels);
        j["mode"] = "eigenvalue";
        j["theta"] = res.theta;
        j["a_values"] = res.a_values;
        j["theta_a"] = res.theta_a;
        j["extrapolated"] = res.extrapolated;
        j["eigen_residual"] = res.residual;
        sol = res.normalized;
    } else if (prob.exponent() > 0.0 && !prob.phi_override) {
        sol = solve_subcritical(prob, spec.solver);
        j["mode"] = "subcritical";
        j["bracket_shift"] = sol.bracket_shift;
        j["bracket_ok"] = sol.bracket_ok;
    } else {
        sol = newton_solve(prob, spec.solver);
        j["mode"] = "newton";
    }
    j["N"] = spec.solver.N;
    j["residual_norm"] = sol.residual_norm;
    j["iterations"] = sol.iterations;
    j["history"] = sol.history;
    j["terminal_order"] = sol.terminal_order;
    io::write_solution_csv(csv, sol, prob.cone);
    j["manifest"] = manifest("solve", a.problem, {a.problem}, {csv.string(), summary.string()}).to_json();
    io::write_json(summary, j);
    std::cout << j.dump(2) << '\n';
    if (j["mode"] == "subcritical" && !sol.bracket_ok) {
        std::cerr << "solution violates the sub/super bracket\n";
        return kVerifyFailed;
    }
    return kOk;
}

// --------------------------------------------------------------- continue

int cmd_continue(const ContinueArgs& a) {
    const io::ProblemSpec spec = io::load_problem(a.problem);
    const RadialProblem& prob = spec.problem;
    const auto& cs = spec.continuation;
    const int N = spec.solver.N;
    const fs::path dir = prepare_dir(a.out_dir);
    const fs::path csv = dir / "branch.csv", summary = dir / "summary.json";

    const ParametricRhs rhs =
        cs.general ? *cs.general : ParametricRhs::supercritical(prob.p, cs.delta0, prob.f(0.0));
    const Branch br = cs.general ? general_rhs_continuation(prob, rhs, cs.config, N)
                                 : continuation_supercritical(prob, cs.delta0, cs.config, N);

    std::unique_ptr<ParametricSystem> sys;
    if (prob.domain == DomainKind::SphereConstant)
        sys = std::make_unique<ScalarSphereSystem>(prob.cone, rhs);
    else
        sys = std::make_unique<RadialDirichletSystem>(prob, rhs, N);

    json j;
    j["termination"] = br.termination;
    j["points"] = br.points.size();
    json folds = json::array();
    for (const auto& f : br.folds)
        folds.push_back({{"t", f.t}, {"probe", f.probe}, {"eig_before", f.eig_before}, {"eig_after", f.eig_after}});
    j["folds"] = folds;
    if (!br.folds.empty()) {
        const double ts = br.folds.front().t;
        j["t_star"] = ts;
        const auto sols = solutions_at(*sys, br, 0.9 * ts);
        std::vector<double> probes;
        for (const auto& x : sols) probes.push_back(sys->probe(x));
        j["probes_at_0.9_t_star"] = probes;
    } else {
        j["t_star"] = nullptr;
    }
    const double t_end = br.points.empty() ? 0.0 : br.points.back().t;
    j["t_last"] = t_end;
    io::write_branch_csv(csv, br);
    j["manifest"] = manifest("continue", a.problem, {a.problem}, {csv.string(), summary.string()}).to_json();
    io::write_json(summary, j);
    std::cout << j.dump(2) << '\n';
    return kOk;
}

// --------------------------------------------------------------- envelope

int cmd_envelope(const EnvelopeArgs& a) {
    std::ifstream is(a.grid);
    if (!is) throw ConfigError("cannot open " + a.grid);
    const GridField f = GridField::read(is);
    const ConeParams cone(a.n, a.k);
    const Point center{a.center[0], a.center[1], a.center[2]};
    EnvelopeOptions opt;
    opt.r_start = a.r_start;
    const auto env = radial_envelope(f, center, opt);
    const double tau = a.tau_cells * f.spacing();
    const auto rep = envelope_viscosity_check(env, cone, tau);

    const fs::path dir = prepare_dir(a.out_dir);
    const fs::path csv = dir / "envelope.csv", summary = dir / "envelope.json";
    io::write_csv(csv, {"r", "wtilde"}, {env.r, env.wtilde});
    json j;
    j["provenance"] = env.provenance;
    j["tau"] = tau;
    j["min_b"] = rep.min_b;
    j["min_ab"] = rep.min_ab;
    json v = json::array();
    for (const auto& x : rep.violations) v.push_back({{"r", x.r}, {"inequality", x.which}, {"value", x.value}});
    j["violations"] = v;
    j["ok"] = rep.ok();
    j["manifest"] = manifest("envelope", "", {a.grid}, {csv.string(), summary.string()}).to_json();
    io::write_json(summary, j);
    std::cout << j.dump(2) << '\n';
    return rep.ok() ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- harnack

int cmd_harnack(const HarnackArgs& a) {
    const ConeParams cone(a.n, a.k);
    HarnackOptions opt;
    opt.max_nodes = a.max_nodes;
    HarnackEstimate est;
    std::string input;
    if (!a.grid.empty()) {
        std::ifstream is(a.grid);
        if (!is) throw ConfigError("cannot open " + a.grid);
        est = harnack_ratio(GridField::read(is), cone, opt);
        input = a.grid;
    } else if (!a.radial.empty()) {
        const auto t = io::read_csv(a.radial);
        RadialSample s{t.column("r"), t.column("chi")};
        est = harnack_ratio(s, cone, opt);
        input = a.radial;
    } else {
        throw ConfigError("supply --grid or --radial");
    }
    json j;
    j["c_est"] = finite_or_null(est.c_est);
    j["exponent"] = est.exponent;
    j["x"] = est.x;
    j["y"] = est.y;
    j["pairs"] = est.pairs;
    std::vector<std::string> outs;
    if (!a.json_out.empty()) outs.push_back(a.json_out);
    j["manifest"] = manifest("harnack", "", {input}, outs).to_json();
    emit(j, a.json_out);
    return kOk;
}

// ----------------------------------------------------------------- volume

int cmd_volume(const VolumeArgs& a) {
    const io::MetricSpec m = io::load_metric(a.metric);
    const auto curve = volume_ratio([&m](double rho) { return m.w(rho); }, m.n, m.radii, m.center);
    const fs::path dir = prepare_dir(a.out_dir);
    const fs::path csv = dir / "volume.csv", summary = dir / "volume.json";
    io::write_csv(csv, {"r", "rho", "volume", "Q"}, {curve.r, curve.rho, curve.volume, curve.Q});

    json j;
    j["n"] = m.n;
    j["omega_n_over_n"] = curve.omega_n / m.n;
    j["max_relative_increase"] = max_relative_increase(curve);
    const auto in_fit = std::count_if(curve.r.begin(), curve.r.end(), [&](double r) { return r <= m.fit_radius; });
    if (in_fit >= 3) {
        j["fit_radius"] = m.fit_radius;
        j["quadratic_coefficient"] = fit_quadratic_coefficient(curve, m.fit_radius);
    }
    const auto ec = end_count_limit(curve);
    j["end_count"] = {{"m", ec.m},
                      {"m_real", ec.m_real},
                      {"residual", ec.residual},
                      {"tail_slope", ec.tail_slope},
                      {"conclusive", ec.conclusive}};
    j["manifest"] = manifest("volume", a.metric, {a.metric}, {csv.string(), summary.string()}).to_json();
    io::write_json(summary, j);
    std::cout << j.dump(2) << '\n';
    return kOk;
}

// ----------------------------------------------------------------- verify

namespace {

struct CheckResult {
    std::string name;
    double max_error = 0.0;
    double tol = 0.0;
    int cases = 0;
    bool pass() const { return max_error <= tol; }
};

// sigma_j by subset enumeration, with the same sum over |lambda| as a scale
std::pair<double, double> enumerate_sigma(const std::vector<double>& lam, int j) {
    const int n = int(lam.size());
    double s = 0.0, sa = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != j) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= lam[std::size_t(i)];
        s += prod;
        sa += std::abs(prod);
    }
    return {s, sa};
}

}  // namespace

int cmd_verify(const VerifyArgs& a) {
    if (a.trials < 1) throw ConfigError("--trials must be positive");
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<CheckResult> checks;

    {
        CheckResult c{"sigma recurrence vs subset enumeration", 0.0, 1e-12, 0};
        for (int t = 0; t < a.trials; ++t) {
            const int n = pick(2, 8);
            std::vector<double> lam(static_cast<std::size_t>(n));
            for (double& x : lam) x = u(rng) * std::pow(10.0, 2.0 * u(rng));
            const auto s = sigma_all(lam, n);
            for (int j = 1; j <= n; ++j) {
                const auto [ref, scale] = enumerate_sigma(lam, j);
                c.max_error = std::max(c.max_error, std::abs(s[std::size_t(j)] - ref) / std::max(scale, 1e-300));
            }
            ++c.cases;
        }
        checks.push_back(c);
    }
    {
        CheckResult c{"radial factorization vs diag(b,...,b,a)", 0.0, 1e-12, 0};
        for (int t = 0; t < a.trials; ++t) {
            const int n = pick(3, 8), k = pick(1, n);
            const double av = u(rng), bv = u(rng);
            std::vector<double> d(std::size_t(n), bv);
            d.back() = av;
            const double ref = sigma_of_matrix(SymMatrix::diagonal(d), k);
            const double val = sigma_k_radial(av, bv, ConeParams(n, k));
            const double scale = binomial(n, k) * std::pow(std::max(std::abs(av), std::abs(bv)), k);
            c.max_error = std::max(c.max_error, std::abs(val - ref) / std::max(scale, 1e-300));
            ++c.cases;
        }
        checks.push_back(c);
    }
    {
        CheckResult c{"bordered minor identity on arrow matrices", 0.0, 1e-10, 0};
        for (int t = 0; t < a.trials; ++t) {
            const int n = pick(3, 6), k = pick(2, n);
            SymMatrix s(n);
            for (int i = 0; i < n; ++i) s(i, i) = u(rng);
            for (int i = 0; i + 1 < n; ++i) s.set_sym(i, n - 1, u(rng));
            c.max_error = std::max(c.max_error, bordered_minor_identity_check(s, k));
            ++c.cases;
        }
        checks.push_back(c);
    }
    {
        CheckResult cv{"V = (n-2)/2 v W", 0.0, 1e-12, 0};
        CheckResult cu{"U = e^w W (flat)", 0.0, 1e-12, 0};
        for (int t = 0; t < a.trials; ++t) {
            const int n = pick(3, 6);
            ConformalJet w;
            w.gauge = Gauge::W;
            w.value = u(rng);
            w.gradient.resize(static_cast<std::size_t>(n));
            for (double& g : w.gradient) g = u(rng);
            w.hessian = SymMatrix(n);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) w.hessian.set_sym(i, j, u(rng));
            w.background = t % 2 ? Background::round_sphere(n) : Background::flat(n);
            const SymMatrix W = matrix_W(w);
            const SymMatrix V = matrix_V(convert_gauge(w, Gauge::V));
            const double beta = 0.5 * (n - 2), v = std::exp(-beta * w.value);
            const double sv = std::max(1.0, beta * v * W.max_abs());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    cv.max_error = std::max(cv.max_error, std::abs(V(i, j) - beta * v * W(i, j)) / sv);
            ++cv.cases;
            if (t % 2 == 0) {
                const SymMatrix U = matrix_U(convert_gauge(w, Gauge::U));
                const double e = std::exp(w.value), su = std::max(1.0, e * W.max_abs());
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        cu.max_error = std::max(cu.max_error, std::abs(U(i, j) - e * W(i, j)) / su);
                ++cu.cases;
            }
        }
        checks.push_back(cv);
        checks.push_back(cu);
    }
    {
        CheckResult c{"2 log r + C: a = b = sigma_k = 0", 0.0, 1e-12, 0};
        for (int t = 0; t < a.trials; ++t) {
            const int n = pick(3, 8), k = pick(n / 2 + 1, n);
            const double r = std::pow(10.0, -3.0 * (0.5 + 0.5 * u(rng)));
            const ConeParams cone(n, k);
            const auto p = RadialProfile::from_function(
                {r, 1.1 * r, 1.2 * r}, cone, [](double x) { return 2.0 * std::log(x) + 1.0; }, [](double x) { return 2.0 / x; },
                [](double x) { return -2.0 / (x * x); });
            const auto ab = ab_reduce(p);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double scale = 2.0 / (p.r[i] * p.r[i]);
                const double s = sigma_k_radial(ab.a[i], ab.b[i], cone);
                c.max_error = std::max({c.max_error, std::abs(ab.a[i]) / scale, std::abs(ab.b[i]) / scale,
                                        std::abs(s) / std::pow(scale, k)});
            }
            ++c.cases;
        }
        checks.push_back(c);
    }
    {
        CheckResult cl{"barrier Laplacian coefficient n(k-1)(2k-n)/k^2", 0.0, 1e-10, 0};
        CheckResult cp{"Pucci operator of the barrier vanishes", 0.0, 1e-12, 0};
        for (auto [n, k] : {std::pair{3, 2}, {4, 3}, {5, 3}, {5, 4}}) {
            const ConeParams cone(n, k);
            const auto pp = PucciParams::from_cone(cone);
            for (int i = 0; i <= 30; ++i) {
                const double r = std::pow(10.0, -3.0 + 0.1 * i);
                const auto eig = barrier_hessian_eigs(cone, r);
                const double scale = std::pow(r, -double(n) / k);
                const double lap = double(n) * (k - 1) * (2 * k - n) / double(k * k);
                const double rr = -double(2 * k - n) * (n - k) / double(k * k);
                cl.max_error = std::max({cl.max_error, std::abs(eig.sum() / scale - lap), std::abs(eig[0] / scale - rr)});
                cp.max_error = std::max(cp.max_error, std::abs(pucci_min(eig, pp)) / scale);
                ++cl.cases;
                ++cp.cases;
            }
        }
        checks.push_back(cl);
        checks.push_back(cp);
    }

    bool all = true;
    json rows = json::array();
    std::cout << std::left << std::setw(48) << "check" << std::setw(8) << "cases" << std::setw(14) << "max error"
              << std::setw(10) << "tol" << "result\n";
    for (const auto& c : checks) {
        all = all && c.pass();
        std::cout << std::left << std::setw(48) << c.name << std::setw(8) << c.cases << std::setw(14)
                  << std::setprecision(3) << c.max_error << std::setw(10) << c.tol << (c.pass() ? "PASS" : "FAIL")
                  << '\n';
        rows.push_back({{"check", c.name}, {"cases", c.cases}, {"max_error", c.max_error}, {"tol", c.tol},
                        {"pass", c.pass()}});
    }
    if (!a.json_out.empty()) {
        json j;
        j["checks"] = rows;
        j["pass"] = all;
        j["manifest"] = manifest("verify", "", {}, {a.json_out}, a.seed).to_json();
        io::write_json(a.json_out, j);
    }
    return all ? kOk : kVerifyFailed;
}

}  // namespace ksigma::cli
