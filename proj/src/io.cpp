#include "ksigma/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ksigma/error.hpp"

namespace ksigma::io {

std::string tool_version() { return "0.3.0"; }

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

json RunManifest::to_json() const {
    return json{{"command", command}, {"config_path", config_path}, {"inputs", inputs},
                {"outputs", outputs},  {"seed", seed},               {"version", version}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    return os;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw DomainError("CSV header and column count differ");
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows) throw DomainError("CSV columns have different lengths");
    auto os = open_out(path);
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << format_double(columns[j][i]);
        os << '\n';
    }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return columns[j];
    throw ConfigError("CSV has no column '" + name + "'");
}

bool CsvTable::has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(path.string() + ": empty CSV");
    t.header = split(line, ',');
    t.columns.assign(t.header.size(), {});
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line, ',');
        if (cells.size() != t.header.size())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
        for (std::size_t j = 0; j < cells.size(); ++j) t.columns[j].push_back(parse_number(cells[j]));
    }
    return t;
}

RadialProfile read_profile_csv(const std::filesystem::path& path, const ConeParams& cone) {
    CsvTable t = read_csv(path);
    // rows listed from the outside in are accepted
    if (t.has("r")) {
        const auto& r = t.column("r");
        if (r.size() > 1 && r.front() > r.back())
            for (auto& col : t.columns) std::reverse(col.begin(), col.end());
    }
    RadialProfile p;
    if (t.has("dw") && t.has("d2w")) {
        p.r = t.column("r");
        p.w = t.column("w");
        p.dw = t.column("dw");
        p.d2w = t.column("d2w");
        p.cone = cone;
        p.analytic = true;
        p.validate();
        return p;
    }
    return RadialProfile::from_samples(t.column("r"), t.column("w"), cone);
}

void write_profile_csv(const std::filesystem::path& path, const RadialProfile& p) {
    write_csv(path, {"r", "w", "dw", "d2w"}, {p.r, p.w, p.dw, p.d2w});
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::function<double(double)> table_function(const json& table) {
    std::vector<double> r, f;
    for (const auto& row : table) {
        if (!row.is_array() || row.size() != 2) throw ConfigError("f_table rows must be [r, f] pairs");
        r.push_back(row[0].get<double>());
        f.push_back(row[1].get<double>());
    }
    if (r.size() < 2) throw ConfigError("f_table needs at least two rows");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw ConfigError("f_table radii must increase");
    return [r, f](double x) {
        if (x <= r.front()) return f.front();
        if (x >= r.back()) return f.back();
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t i = std::size_t(it - r.begin());
        const double s = (x - r[i - 1]) / (r[i] - r[i - 1]);
        return (1.0 - s) * f[i - 1] + s * f[i];
    };
}

GrowthClass parse_growth(const std::string& s) {
    if (s == "none") return GrowthClass::None;
    if (s == "bounded_below_superlinear") return GrowthClass::BoundedBelowSuperlinear;
    if (s == "vanishing_superlinear") return GrowthClass::VanishingSuperlinear;
    throw ConfigError("unknown growth class '" + s + "'");
}

}  // namespace

ProblemSpec parse_problem(const json& j) {
    try {
        ProblemSpec spec;
        const ConeParams cone(j.at("n").get<int>(), j.at("k").get<int>());
        const json& dom = j.at("domain");
        const std::string type = dom.at("type").get<std::string>();
        double w0 = 0.0, w1 = 0.0;
        if (dom.contains("bc")) {
            const json& bc = dom.at("bc");
            if (bc.is_array()) {
                if (bc.size() != 2) throw ConfigError("bc array must be [w(r0), w(r1)]");
                w0 = bc[0].get<double>();
                w1 = bc[1].get<double>();
            } else {
                w0 = get_or(bc, "w_inner", 0.0);
                w1 = get_or(bc, "w_outer", 0.0);
            }
        }
        RadialProblem& p = spec.problem;
        if (type == "annulus")
            p = RadialProblem::annulus(cone, dom.at("r0").get<double>(), dom.at("r1").get<double>(), w0, w1);
        else if (type == "ball")
            p = RadialProblem::ball(cone, dom.at("r1").get<double>(), w1);
        else if (type == "sphere_constant")
            p = RadialProblem::sphere_constant(cone);
        else
            throw ConfigError("unknown domain type '" + type + "'");

        if (j.contains("background")) {
            const std::string bg = j.at("background").get<std::string>();
            if (bg == "flat")
                p.background = Background::flat(cone.n);
            else if (bg == "round_sphere")
                p.background = Background::round_sphere(cone.n);
            else
                throw ConfigError("unknown background '" + bg + "'");
        }
        p.p = get_or(j, "p", 0.0);

        if (j.contains("rhs")) {
            const json& rhs = j.at("rhs");
            const std::string form = get_or<std::string>(rhs, "form", "v_power");
            if (form == "v_power")
                p.form = RhsForm::VPower;
            else if (form == "w_exponential")
                p.form = RhsForm::WExponential;
            else
                throw ConfigError("unknown rhs form '" + form + "'");
            if (rhs.contains("f_table")) {
                p.f = table_function(rhs.at("f_table"));
            } else {
                const double fc = get_or(rhs, "f_const", 1.0);
                p.f = [fc](double) { return fc; };
            }
            if (rhs.contains("terms")) {
                std::vector<PowerTerm> terms;
                for (const auto& t : rhs.at("terms"))
                    terms.push_back({t.at("coeff").get<double>(), t.at("power").get<double>()});
                spec.continuation.general =
                    ParametricRhs::general(std::move(terms), parse_growth(get_or<std::string>(rhs, "growth", "none")));
            }
        }

        if (j.contains("solver")) {
            const json& s = j.at("solver");
            spec.solver.N = get_or(s, "N", spec.solver.N);
            spec.solver.tol = get_or(s, "tol", spec.solver.tol);
            spec.solver.max_iter = get_or(s, "max_iter", spec.solver.max_iter);
        }
        if (j.contains("continuation")) {
            const json& c = j.at("continuation");
            ContinuationConfig& cc = spec.continuation.config;
            spec.continuation.delta0 = get_or(c, "delta0", 1.0);
            cc.ds = get_or(c, "step", cc.ds);
            cc.ds_max = std::max(cc.ds_max, cc.ds);
            cc.arclength = get_or(c, "arclength", cc.arclength);
            cc.t_start = get_or(c, "t_start", cc.t_start);
            cc.t_max = get_or(c, "t_max", cc.t_max);
            cc.probe_max = get_or(c, "probe_max", cc.probe_max);
            cc.max_steps = get_or(c, "max_steps", cc.max_steps);
        }
        spec.solver.validate();
        p.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("problem JSON: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("problem JSON: ") + e.what());
    }
}

json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

ProblemSpec load_problem(const std::filesystem::path& path) { return parse_problem(read_json(path)); }

void write_solution_csv(const std::filesystem::path& path, const Solution& s, const ConeParams& cone) {
    std::vector<double> res = s.residual;
    res.resize(s.w.size(), 0.0);
    write_csv(path, {"r", "w", "v", "residual"}, {s.r, s.w, s.v(cone), res});
}

void write_branch_csv(const std::filesystem::path& path, const Branch& b) {
    std::vector<double> t, d, v, it, fold;
    for (const auto& p : b.points) {
        t.push_back(p.t);
        d.push_back(p.delta_t);
        v.push_back(p.probe);
        it.push_back(p.newton_iters);
        fold.push_back(p.fold ? 1.0 : 0.0);
    }
    auto os = open_out(path);
    os << "t,delta_t,v_at_probe,newton_iters,fold_flag\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        os << format_double(t[i]) << ',' << format_double(d[i]) << ',' << format_double(v[i]) << ','
           << int(it[i]) << ',' << int(fold[i]) << '\n';
}

double MetricSpec::w(double rho) const {
    if (kind == "round_sphere") return std::log(0.5 * (1.0 + rho * rho));
    if (kind == "flat") return 0.0;
    if (kind == "fundamental") return 2.0 * std::log(rho) + offset;
    if (kind == "power") return coeff * std::pow(rho, exponent);
    throw ConfigError("unknown metric kind '" + kind + "'");
}

MetricSpec parse_metric(const json& j) {
    try {
        MetricSpec m;
        m.n = j.at("n").get<int>();
        if (m.n < 2) throw ConfigError("metric needs n >= 2");
        const json& w = j.at("w");
        m.kind = w.at("type").get<std::string>();
        m.offset = get_or(w, "offset", 0.0);
        m.coeff = get_or(w, "coeff", 1.0);
        m.exponent = get_or(w, "exponent", 1.0);
        (void)m.w(1.0);
        const std::string center = get_or<std::string>(j, "center", "origin");
        if (center == "origin")
            m.center = VolumeCenter::Origin;
        else if (center == "infinity")
            m.center = VolumeCenter::Infinity;
        else
            throw ConfigError("center must be 'origin' or 'infinity'");
        const json& radii = j.at("radii");
        if (radii.is_array()) {
            m.radii = radii.get<std::vector<double>>();
        } else {
            const double lo = radii.at("r_min").get<double>(), hi = radii.at("r_max").get<double>();
            const int count = radii.at("count").get<int>();
            if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError("radii need 0 < r_min < r_max, count >= 2");
            for (int i = 0; i < count; ++i) m.radii.push_back(lo + (hi - lo) * i / (count - 1));
        }
        m.fit_radius = get_or(j, "fit_radius", 1.0);
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("metric JSON: ") + e.what());
    }
}

MetricSpec load_metric(const std::filesystem::path& path) { return parse_metric(read_json(path)); }

}  // namespace ksigma::io
