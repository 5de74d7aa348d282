#include "ksigma/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ksigma/error.hpp"
#include "ksigma/radial.hpp"

namespace ksigma {

const char* to_string(DomainKind d) {
    switch (d) {
        case DomainKind::Annulus: return "annulus";
        case DomainKind::Ball: return "ball";
        case DomainKind::SphereConstant: return "sphere_constant";
    }
    return "?";
}

const char* to_string(RhsForm f) {
    switch (f) {
        case RhsForm::WExponential: return "w_exponential";
        case RhsForm::VPower: return "v_power";
    }
    return "?";
}

RadialProblem RadialProblem::annulus(const ConeParams& cone, double r0, double r1, double w_inner,
                                     double w_outer) {
    RadialProblem p;
    p.cone = cone;
    p.domain = DomainKind::Annulus;
    p.r0 = r0;
    p.r1 = r1;
    p.w_inner = w_inner;
    p.w_outer = w_outer;
    p.background = Background::flat(cone.n);
    return p;
}

RadialProblem RadialProblem::ball(const ConeParams& cone, double r1, double w_outer) {
    RadialProblem p;
    p.cone = cone;
    p.domain = DomainKind::Ball;
    p.r0 = 0.0;
    p.r1 = r1;
    p.w_outer = w_outer;
    p.background = Background::flat(cone.n);
    return p;
}

RadialProblem RadialProblem::sphere_constant(const ConeParams& cone) {
    RadialProblem p;
    p.cone = cone;
    p.domain = DomainKind::SphereConstant;
    p.r0 = 0.0;
    p.r1 = 0.0;
    p.background = Background::round_sphere(cone.n);
    return p;
}

double RadialProblem::exponent() const { return exponent_from_power(cone.n, cone.k, p); }

double RadialProblem::f_w(double r) const {
    const double fr = f(r);
    return form == RhsForm::VPower ? fr * v_power_prefactor(cone.n, cone.k) : fr;
}

double RadialProblem::phi(double r, double w) const {
    if (phi_override) return phi_override(r, w);
    return f_w(r) * std::exp(exponent() * w);
}

double RadialProblem::dphi_dw(double r, double w) const {
    if (phi_override) return dphi_override ? dphi_override(r, w) : 0.0;
    return exponent() * f_w(r) * std::exp(exponent() * w);
}

void RadialProblem::validate() const {
    if (!f && !phi_override) throw ConfigError("problem has no right-hand side");
    if (background.dim() != cone.n) throw ConfigError("background dimension does not match n");
    switch (domain) {
        case DomainKind::Annulus:
            if (!(r0 > 0.0) || !(r1 > r0)) throw ConfigError("annulus needs 0 < r0 < r1");
            break;
        case DomainKind::Ball:
            if (!(r1 > 0.0)) throw ConfigError("ball needs r1 > 0");
            break;
        case DomainKind::SphereConstant:
            if (background.kind != BackgroundKind::RoundSphereStereographic)
                throw ConfigError("constant reduction needs the round-sphere background");
            return;
    }
    if (background.kind != BackgroundKind::Flat)
        throw UnsupportedRegime("radial domains are discretized on the flat background only");
    cone.require_supercritical("radial solver");
}

void SolverConfig::validate() const {
    if (N < 16) throw ConfigError("grid size N must be >= 16");
    if (!(tol > 0.0)) throw ConfigError("Newton tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(min_damping > 0.0 && min_damping < 1.0)) throw ConfigError("min_damping must lie in (0, 1)");
    if (!(step > 0.0) || !(min_step > 0.0) || !(max_step >= step) || min_step > step)
        throw ConfigError("continuation steps must satisfy 0 < min_step <= step <= max_step");
}

std::vector<double> problem_grid(const RadialProblem& problem, int N) {
    switch (problem.domain) {
        case DomainKind::Annulus: return uniform_grid(problem.r0, problem.r1, N);
        case DomainKind::Ball: return uniform_grid(0.0, problem.r1, N);
        case DomainKind::SphereConstant: return {0.0};
    }
    return {};
}

Assembly assemble(const RadialProblem& problem, const std::vector<double>& r,
                  const std::vector<double>& w, const AssembleOptions& opt) {
    if (r.size() != w.size() || r.empty()) throw DomainError("assemble: grid and state sizes differ");
    const std::size_t m = r.size();
    const ConeParams& cone = problem.cone;
    Assembly out;
    out.residual.assign(m, 0.0);
    out.lower.assign(m, 0.0);
    out.diag.assign(m, 0.0);
    out.upper.assign(m, 0.0);
    out.cone_margin = std::numeric_limits<double>::infinity();

    if (problem.domain == DomainKind::SphereConstant) {
        const double s = sigma_of_matrix(problem.background.schouten, cone.k);
        out.residual[0] = s - problem.phi(0.0, w[0]);
        out.diag[0] = -problem.dphi_dw(0.0, w[0]);
        out.cone_margin = sigma(EigenTuple(symmetric_eigenvalues(problem.background.schouten)), 1);
        return out;
    }
    if (m < 4) throw DomainError("assemble: grid too small");
    const double h = r[1] - r[0];
    const double theta = cone.theta();
    const int n = cone.n, k = cone.k;

    std::size_t first = 1;
    if (problem.domain == DomainKind::Ball) {
        // w'(0) = 0: W = w''(0) I with w''(0) ~ 2 (w_1 - w_0) / h^2.
        const double c = binomial(n, k);
        const double s = 2.0 * (w[1] - w[0]) / (h * h);
        out.residual[0] = c * std::pow(s, k) - problem.phi(0.0, w[0]);
        const double ds = c * k * std::pow(s, k - 1) * 2.0 / (h * h);
        out.diag[0] = -ds - problem.dphi_dw(0.0, w[0]);
        out.upper[0] = ds;
        out.cone_margin = s;
        out.worst_node = 0;
    } else {
        out.residual[0] = w[0] - problem.w_inner;
        out.diag[0] = 1.0;
    }
    out.residual[m - 1] = w[m - 1] - problem.w_outer;
    out.diag[m - 1] = 1.0;

    for (std::size_t i = first; i + 1 < m; ++i) {
        const double d1 = (w[i + 1] - w[i - 1]) / (2.0 * h);
        const double d2 = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h);
        const double a = d2 + 0.5 * d1 * d1;
        const double b = d1 / r[i] - 0.5 * d1 * d1;
        const double margin = std::min(b, a + theta * b);
        if (margin < out.cone_margin) {
            out.cone_margin = margin;
            out.worst_node = i;
        }
        double sa = 0.0, sb = 0.0;
        sigma_k_radial_partials(a, b, cone, sa, sb);
        const double s1 = sa * d1 + sb * (1.0 / r[i] - d1);  // d sigma / d w'
        out.residual[i] = sigma_k_radial(a, b, cone) - problem.phi(r[i], w[i]);
        out.lower[i] = -s1 / (2.0 * h) + sa / (h * h);
        out.upper[i] = s1 / (2.0 * h) + sa / (h * h);
        out.diag[i] = -2.0 * sa / (h * h) - problem.dphi_dw(r[i], w[i]);
    }
    if (opt.require_admissible && !(out.cone_margin > 0.0)) {
        std::ostringstream msg;
        msg << "iterate leaves the admissible cone at node " << out.worst_node << " (r = " << r[out.worst_node]
            << ", margin " << out.cone_margin << ")";
        throw AdmissibilityError(msg.str(), out.worst_node, out.cone_margin);
    }
    return out;
}

void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                       std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    if (lower.size() != m || upper.size() != m || rhs.size() != m)
        throw DomainError("tridiagonal system has inconsistent sizes");
    for (std::size_t i = 1; i < m; ++i) {
        if (diag[i - 1] == 0.0) throw DomainError("singular tridiagonal system (zero pivot)");
        const double f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    if (diag[m - 1] == 0.0) throw DomainError("singular tridiagonal system (zero pivot)");
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

std::vector<double> Solution::v(const ConeParams& cone) const {
    const double beta = 0.5 * (cone.n - 2);
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::exp(-beta * w[i]);
    return out;
}

std::vector<double> default_initial_guess(const RadialProblem& problem, const std::vector<double>& r) {
    std::vector<double> w(r.size(), 0.0);
    switch (problem.domain) {
        case DomainKind::SphereConstant: return w;
        case DomainKind::Ball: {
            const double scale = std::exp(problem.w_outer);
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double s = r[i] / problem.r1;
                w[i] = std::log(0.5 * scale * (1.0 + s * s));
            }
            return w;
        }
        case DomainKind::Annulus: break;
    }
    const double jump = problem.w_outer - problem.w_inner;
    if (!(jump > 0.0) || !(jump < 2.0 * std::log(problem.r1 / problem.r0)))
        throw DomainError(
            "no admissible quadratic initializer: need 0 < w(r1) - w(r0) < 2 log(r1/r0); supply an "
            "initial iterate");
    const double u0 = std::exp(problem.w_inner), u1 = std::exp(problem.w_outer);
    const double beta = (u1 - u0) / (problem.r1 * problem.r1 - problem.r0 * problem.r0);
    const double alpha = u0 - beta * problem.r0 * problem.r0;
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::log(alpha + beta * r[i] * r[i]);
    w.front() = problem.w_inner;
    w.back() = problem.w_outer;
    return w;
}

namespace {

double sup_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

double observed_order(const std::vector<double>& hist) {
    // Best of the last two triples with a genuine decrease: the final residual
    // often sits on the rounding floor and understates the order.
    double best = 0.0;
    int seen = 0;
    for (std::size_t j = hist.size(); j-- > 2 && seen < 2;) {
        const double e2 = hist[j], e1 = hist[j - 1], e0 = hist[j - 2];
        if (e2 < 1e-13 || !(e1 < e0) || !(e2 < e1)) continue;
        best = std::max(best, std::log(e2 / e1) / std::log(e1 / e0));
        ++seen;
    }
    return best;
}

}  // namespace

Solution newton_solve(const RadialProblem& problem, std::vector<double> w, const SolverConfig& config) {
    problem.validate();
    config.validate();
    Solution sol;
    sol.r = problem_grid(problem, config.N);
    if (w.size() != sol.r.size()) throw DomainError("initial iterate does not match the grid");

    Assembly sys = assemble(problem, sol.r, w);
    double norm = sup_norm(sys.residual);
    sol.history.push_back(norm);
    while (norm > config.tol) {
        if (sol.iterations >= config.max_iter) {
            std::ostringstream msg;
            msg << "Newton did not converge in " << config.max_iter << " iterations (residual " << norm << ")";
            throw ConvergenceError(msg.str(), sol.history);
        }
        std::vector<double> step(sys.residual.size());
        for (std::size_t i = 0; i < step.size(); ++i) step[i] = -sys.residual[i];
        solve_tridiagonal(sys.lower, sys.diag, sys.upper, step);

        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= config.min_damping) {
            std::vector<double> trial(w);
            for (std::size_t i = 0; i < w.size(); ++i) trial[i] += lambda * step[i];
            try {
                Assembly next = assemble(problem, sol.r, trial);
                const double trial_norm = sup_norm(next.residual);
                if (std::isfinite(trial_norm) && trial_norm < norm) {
                    w.swap(trial);
                    sys = std::move(next);
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            } catch (const AdmissibilityError&) {
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "damping underflow after " << sol.iterations
                << " iterations: every trial step left the cone or increased the residual (" << norm
                << "); try a better admissible initialization";
            throw ConvergenceError(msg.str(), sol.history);
        }
        ++sol.iterations;
        sol.damping.push_back(lambda);
        sol.history.push_back(norm);
    }
    sol.w = std::move(w);
    sol.residual = sys.residual;
    sol.residual_norm = norm;
    sol.terminal_order = observed_order(sol.history);
    return sol;
}

Solution newton_solve(const RadialProblem& problem, const SolverConfig& config) {
    problem.validate();
    config.validate();
    return newton_solve(problem, default_initial_guess(problem, problem_grid(problem, config.N)), config);
}

Solution solve_subcritical(const RadialProblem& problem, const SolverConfig& config, std::vector<double> seed) {
    const double a = problem.exponent();
    if (problem.phi_override || !(a > 0.0))
        throw UnsupportedRegime("subcritical solve needs the f e^{a w} form with p < k (a > 0)");
    problem.validate();
    config.validate();
    const auto r = problem_grid(problem, config.N);
    if (seed.empty()) seed = default_initial_guess(problem, r);
    for (double x : r)
        if (!(problem.f(x) > 0.0)) throw DomainError("subcritical solve needs f > 0");

    // sigma(seed) = f e^{a (seed + c)} bounds: seed + c_hi is a supersolution, seed - c_lo a subsolution.
    const Assembly s = assemble(problem, r, seed);
    const std::size_t first = problem.domain == DomainKind::Annulus ? 1 : 0;
    const std::size_t last = problem.domain == DomainKind::SphereConstant ? 1 : r.size() - 1;
    double shift = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double sig = s.residual[i] + problem.phi(r[i], seed[i]);
        const double c = std::log(sig / problem.phi(r[i], seed[i])) / a;
        shift = std::max(shift, std::abs(c));
    }

    Solution sol = newton_solve(problem, seed, config);
    sol.bracket_checked = true;
    sol.bracket_shift = shift;
    sol.bracket_ok = true;
    for (std::size_t i = 0; i < sol.w.size(); ++i) {
        const double slack = 1e-8 * (1.0 + std::abs(seed[i])) + 10.0 * config.tol;
        if (sol.w[i] < seed[i] - shift - slack || sol.w[i] > seed[i] + shift + slack) sol.bracket_ok = false;
    }
    return sol;
}

EigenvalueResult solve_eigenvalue(const RadialProblem& problem, const SolverConfig& config, int levels) {
    problem.validate();
    if (problem.domain != DomainKind::SphereConstant)
        throw UnsupportedRegime(
            "eigenvalue extraction is implemented for the constant round-sphere reduction; a Dirichlet "
            "radial problem has no eigenvalue");
    if (levels < 3) throw ConfigError("eigenvalue scheme needs at least 3 levels of a");
    if (!(problem.f_w(0.0) > 0.0)) throw DomainError("eigenvalue scheme needs f > 0");

    EigenvalueResult res;
    std::vector<double> w{0.0};
    double a_prev = 0.0;
    Solution last;
    for (int j = 0; j < levels; ++j) {
        const double a = 0.5 * std::ldexp(1.0, -j);
        RadialProblem pa = problem;
        pa.phi_override = [problem, a](double r, double x) { return problem.f_w(r) * std::exp(a * x); };
        pa.dphi_override = [problem, a](double r, double x) { return a * problem.f_w(r) * std::exp(a * x); };
        if (a_prev > 0.0)
            for (double& x : w) x *= a_prev / a;  // w_a scales like 1/a
        last = newton_solve(pa, w, config);
        w = last.w;
        a_prev = a;
        const double inf_w = *std::min_element(w.begin(), w.end());
        res.a_values.push_back(a);
        res.theta_a.push_back(std::exp(a * inf_w));
        if (j > 0) {
            const double l1 = std::log(res.theta_a[j - 1]), l2 = std::log(res.theta_a[j]);
            res.extrapolated.push_back(std::exp(2.0 * l2 - l1));
        }
    }
    const std::size_t e = res.extrapolated.size();
    const double change = std::abs(std::log(res.extrapolated[e - 1] / res.extrapolated[e - 2]));
    if (!(change < 1e-4)) {
        std::ostringstream msg;
        msg << "theta_a sequence did not settle (last Richardson change " << change << ")";
        throw ConvergenceError(msg.str(), res.theta_a);
    }
    res.theta = res.extrapolated.back();

    const double inf_w = *std::min_element(last.w.begin(), last.w.end());
    res.normalized = last;
    for (double& x : res.normalized.w) x -= inf_w;
    RadialProblem p0 = problem;
    const double theta = res.theta;
    p0.phi_override = [problem, theta](double r, double) { return theta * problem.f_w(r); };
    p0.dphi_override = [](double, double) { return 0.0; };
    const Assembly check = assemble(p0, res.normalized.r, res.normalized.w);
    res.normalized.residual = check.residual;
    res.residual = sup_norm(check.residual);
    res.normalized.residual_norm = res.residual;
    if (res.residual > std::max(config.tol, 1e-8 * theta)) {
        std::ostringstream msg;
        msg << "normalized state does not solve sigma_k(W) = theta f (residual " << res.residual << ")";
        throw ConvergenceError(msg.str(), res.theta_a);
    }
    return res;
}

}  // namespace ksigma
