#include "ksigma/continuation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ksigma/error.hpp"

namespace ksigma {

double delta_schedule(double delta0, double t) {
    if (t <= 1.0) return delta0;
    if (t >= 2.0) return 1.0;
    const double s = t - 1.0;
    return delta0 + (1.0 - delta0) * s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double delta_schedule_derivative(double delta0, double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double s = t - 1.0;
    return (1.0 - delta0) * 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

const char* to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::None: return "none";
        case GrowthClass::BoundedBelowSuperlinear: return "bounded_below_superlinear";
        case GrowthClass::VanishingSuperlinear: return "vanishing_superlinear";
    }
    return "?";
}

ParametricRhs ParametricRhs::supercritical(double p, double delta0, double f) {
    if (!(delta0 > 0.0 && delta0 <= 1.0)) throw ConfigError("delta0 must lie in (0, 1]");
    if (!(f > 0.0)) throw ConfigError("f must be positive");
    ParametricRhs r;
    r.kind = Kind::Supercritical;
    r.p = p;
    r.delta0 = delta0;
    r.f = f;
    return r;
}

ParametricRhs ParametricRhs::general(std::vector<PowerTerm> terms, GrowthClass growth) {
    if (terms.empty()) throw ConfigError("general right-hand side needs at least one term");
    ParametricRhs r;
    r.kind = Kind::General;
    r.terms = std::move(terms);
    r.growth = growth;
    return r;
}

double ParametricRhs::delta_at(double t) const {
    return kind == Kind::Supercritical ? delta_schedule(delta0, t) : 0.0;
}

double ParametricRhs::rho(double t, double v) const {
    if (kind == Kind::Supercritical) return delta_schedule(delta0, t) + f * std::pow(v, p);
    double s = 0.0;
    for (const auto& term : terms) s += term.coeff * std::pow(v, term.power);
    return s;
}

double ParametricRhs::rho_v(double, double v) const {
    if (kind == Kind::Supercritical) return f * p * std::pow(v, p - 1.0);
    double s = 0.0;
    for (const auto& term : terms)
        if (term.power != 0.0) s += term.coeff * term.power * std::pow(v, term.power - 1.0);
    return s;
}

double ParametricRhs::rho_t(double t, double) const {
    return kind == Kind::Supercritical ? delta_schedule_derivative(delta0, t) : 0.0;
}

void ParametricRhs::validate_growth(int k, double v_lo, double v_hi) const {
    if (growth == GrowthClass::None) return;
    auto q = [&](double v) { return rho(1.0, v) / std::pow(v, k); };
    std::ostringstream why;
    for (int i = 0; i <= 24; ++i) {
        const double v = v_lo * std::pow(v_hi / v_lo, i / 24.0);
        if (!(rho(1.0, v) > 0.0)) {
            why << "rho(" << v << ") = " << rho(1.0, v) << " is not positive";
            throw ConfigError("growth validation failed: " + why.str());
        }
    }
    if (!(q(v_hi) > 1e2 * q(1.0) && q(v_hi) > q(0.1 * v_hi)))
        throw ConfigError("growth validation failed: v^{-k} rho does not grow at the upper sample");
    if (growth == GrowthClass::BoundedBelowSuperlinear) {
        if (!(rho(1.0, v_lo) >= 0.5 * rho(1.0, 10.0 * v_lo)))
            throw ConfigError("growth validation failed: rho is not bounded below near v = 0");
    } else {
        if (!(q(v_lo) < 1e-2 * q(1.0) && q(v_lo) < q(10.0 * v_lo)))
            throw ConfigError("growth validation failed: v^{-k} rho does not vanish at the lower sample");
    }
}

ScalarSphereSystem::ScalarSphereSystem(const ConeParams& cone, ParametricRhs rhs)
    : cone_(cone), rhs_(std::move(rhs)),
      coeff_(binomial(cone.n, cone.k) * std::pow(0.25 * (cone.n - 2), cone.k)) {}

void ScalarSphereSystem::evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& Fx,
                                  Eigen::VectorXd& Ft) const {
    const double v = x(0);
    const int k = cone_.k;
    F.resize(1);
    Fx.resize(1, 1);
    Ft.resize(1);
    F(0) = coeff_ * std::pow(v, k) - t * rhs_.rho(t, v);
    Fx(0, 0) = coeff_ * k * std::pow(v, k - 1) - t * rhs_.rho_v(t, v);
    Ft(0) = -(rhs_.rho(t, v) + t * rhs_.rho_t(t, v));
}

Eigen::VectorXd ScalarSphereSystem::initial_state(double t) const {
    auto g = [&](double v) { return coeff_ * std::pow(v, cone_.k) - t * rhs_.rho(t, v); };
    double prev_v = 1e-12, prev_g = g(prev_v);
    for (int i = 1; i <= 480; ++i) {
        const double v = 1e-12 * std::pow(10.0, i / 20.0);
        const double gv = g(v);
        if ((prev_g <= 0.0) != (gv <= 0.0)) {
            double lo = prev_v, hi = v;
            const bool lo_neg = prev_g <= 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) <= 0.0) == lo_neg)
                    lo = mid;
                else
                    hi = mid;
            }
            Eigen::VectorXd x(1);
            x(0) = 0.5 * (lo + hi);
            return x;
        }
        prev_v = v;
        prev_g = gv;
    }
    throw DomainError("no positive constant solution at the starting t");
}

RadialDirichletSystem::RadialDirichletSystem(RadialProblem base, ParametricRhs rhs, int N)
    : base_(std::move(base)), rhs_(std::move(rhs)) {
    if (base_.domain == DomainKind::SphereConstant)
        throw ConfigError("use ScalarSphereSystem for the constant reduction");
    base_.validate();
    r_ = problem_grid(base_, N);
}

RadialProblem RadialDirichletSystem::problem_at(double t) const {
    RadialProblem p = base_;
    const double beta = 0.5 * (base_.cone.n - 2);
    const int k = base_.cone.k;
    const double pre = std::pow(beta, -k);
    const ParametricRhs rhs = rhs_;
    p.phi_override = [=](double, double w) {
        const double v = std::exp(-beta * w);
        return pre * std::pow(v, -k) * t * rhs.rho(t, v);
    };
    p.dphi_override = [=](double, double w) {
        const double v = std::exp(-beta * w);
        const double vk = std::pow(v, -k);
        return pre * t * vk * (k * beta * rhs.rho(t, v) - beta * v * rhs.rho_v(t, v));
    };
    return p;
}

void RadialDirichletSystem::evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& Fx,
                                     Eigen::VectorXd& Ft) const {
    const std::vector<double> w(x.data(), x.data() + x.size());
    const Assembly sys = assemble(problem_at(t), r_, w, AssembleOptions{false});
    const std::size_t m = r_.size();
    F.resize(Eigen::Index(m));
    Fx.setZero(Eigen::Index(m), Eigen::Index(m));
    Ft.setZero(Eigen::Index(m));
    const double beta = 0.5 * (base_.cone.n - 2);
    const int k = base_.cone.k;
    const double pre = std::pow(beta, -k);
    const std::size_t first = base_.domain == DomainKind::Ball ? 0 : 1;
    for (std::size_t i = 0; i < m; ++i) {
        const auto ii = Eigen::Index(i);
        F(ii) = sys.residual[i];
        Fx(ii, ii) = sys.diag[i];
        if (i > 0) Fx(ii, ii - 1) = sys.lower[i];
        if (i + 1 < m) Fx(ii, ii + 1) = sys.upper[i];
        if (i >= first && i + 1 < m) {
            const double v = std::exp(-beta * w[i]);
            Ft(ii) = -pre * std::pow(v, -k) * (rhs_.rho(t, v) + t * rhs_.rho_t(t, v));
        }
    }
}

bool RadialDirichletSystem::admissible(const Eigen::VectorXd& x) const {
    const std::vector<double> w(x.data(), x.data() + x.size());
    const Assembly sys = assemble(problem_at(1.0), r_, w, AssembleOptions{false});
    return sys.cone_margin > 0.0;
}

double RadialDirichletSystem::probe(const Eigen::VectorXd& x) const {
    const double beta = 0.5 * (base_.cone.n - 2);
    const std::size_t mid = base_.domain == DomainKind::Ball ? 0 : r_.size() / 2;
    return std::exp(-beta * x(Eigen::Index(mid)));
}

Eigen::VectorXd RadialDirichletSystem::initial_state(double t) const {
    SolverConfig cfg;
    cfg.N = int(r_.size()) - 1;
    cfg.tol = 1e-12;
    const Solution sol = newton_solve(problem_at(t), cfg);
    return Eigen::Map<const Eigen::VectorXd>(sol.w.data(), Eigen::Index(sol.w.size()));
}

double smallest_jacobian_eigenvalue(const ParametricSystem& system, double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd F, Ft;
    Eigen::MatrixXd Fx;
    system.evaluate(t, x, F, Fx, Ft);
    if (Fx.rows() == 1) return Fx(0, 0);
    // Dirichlet rows (unit rows of F_x) carry the eigenvalue 1 and are dropped
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < Fx.rows(); ++i) {
        const bool unit = Fx(i, i) == 1.0 && Fx.row(i).cwiseAbs().sum() == 1.0;
        if (!unit) keep.push_back(i);
    }
    if (keep.empty()) return 1.0;
    Eigen::MatrixXd J(Eigen::Index(keep.size()), Eigen::Index(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a)
        for (std::size_t b = 0; b < keep.size(); ++b) J(Eigen::Index(a), Eigen::Index(b)) = Fx(keep[a], keep[b]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
    const auto ev = es.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i)
        if (std::abs(ev(i)) < std::abs(ev(best))) best = i;
    return ev(best).real();
}

namespace {

struct State {
    Eigen::VectorXd x;
    double t = 0.0;
};

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Newton in x at fixed t.
bool fixed_t_newton(const ParametricSystem& sys, double t, Eigen::VectorXd& x, double tol, int max_iter,
                    int* iters = nullptr) {
    Eigen::VectorXd F, Ft;
    Eigen::MatrixXd Fx;
    for (int it = 0; it <= max_iter; ++it) {
        sys.evaluate(t, x, F, Fx, Ft);
        const double res = sup(F);
        if (!std::isfinite(res)) return false;
        if (iters) *iters = it;
        if (res <= tol) return true;
        const Eigen::VectorXd dx = Fx.partialPivLu().solve(-F);
        double lambda = 1.0;
        Eigen::VectorXd trial = x + dx;
        while (!sys.admissible(trial) && lambda > 1e-4) {
            lambda *= 0.5;
            trial = x + lambda * dx;
        }
        if (!sys.admissible(trial)) return false;
        if (sup(dx) * lambda <= 1e-15 * (1.0 + sup(x))) {
            x = trial;
            sys.evaluate(t, x, F, Fx, Ft);
            if (iters) *iters = it + 1;
            return sup(F) <= std::sqrt(tol);
        }
        x = trial;
    }
    return false;
}

// Tangent of the solution curve at (x, t) oriented along `prev` (or toward
// increasing t when prev is empty), unit length in (x, t).
Eigen::VectorXd tangent(const ParametricSystem& sys, const State& s, const Eigen::VectorXd& prev) {
    Eigen::VectorXd F, Ft;
    Eigen::MatrixXd Fx;
    sys.evaluate(s.t, s.x, F, Fx, Ft);
    const Eigen::Index m = Fx.rows();
    Eigen::MatrixXd B(m + 1, m + 1);
    B.topLeftCorner(m, m) = Fx;
    B.topRightCorner(m, 1) = Ft;
    Eigen::VectorXd row = prev;
    if (row.size() == 0) {
        row = Eigen::VectorXd::Zero(m + 1);
        row(m) = 1.0;
    }
    B.bottomRows(1) = row.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = 1.0;
    Eigen::VectorXd z = B.fullPivLu().solve(rhs);
    z.normalize();
    if (z.dot(row) < 0.0) z = -z;
    return z;
}

// Pseudo-arclength corrector for the point at arclength `ds` from `base` along `tau`.
bool corrector(const ParametricSystem& sys, const State& base, const Eigen::VectorXd& tau, double ds,
               const ContinuationConfig& cfg, State& out, int& iters) {
    const Eigen::Index m = base.x.size();
    State s{base.x + ds * tau.head(m), base.t + ds * tau(m)};
    Eigen::VectorXd F, Ft;
    Eigen::MatrixXd Fx;
    for (iters = 0; iters <= cfg.max_corrector; ++iters) {
        if (!sys.admissible(s.x)) return false;
        sys.evaluate(s.t, s.x, F, Fx, Ft);
        const double g = tau.head(m).dot(s.x - base.x) + tau(m) * (s.t - base.t) - ds;
        const double res = std::max(sup(F), std::abs(g));
        if (!std::isfinite(res)) return false;
        if (res <= cfg.tol) {
            out = s;
            return true;
        }
        Eigen::MatrixXd B(m + 1, m + 1);
        B.topLeftCorner(m, m) = Fx;
        B.topRightCorner(m, 1) = Ft;
        B.bottomRows(1) = tau.transpose();
        Eigen::VectorXd rhs(m + 1);
        rhs.head(m) = -F;
        rhs(m) = -g;
        const Eigen::VectorXd d = B.partialPivLu().solve(rhs);
        if (!d.allFinite()) return false;
        s.x += d.head(m);
        s.t += d(m);
        if (sup(d) <= 1e-15 * (1.0 + sup(s.x) + std::abs(s.t))) {
            sys.evaluate(s.t, s.x, F, Fx, Ft);
            if (sup(F) <= std::sqrt(cfg.tol) && sys.admissible(s.x)) {
                out = s;
                ++iters;
                return true;
            }
            return false;
        }
    }
    return false;
}

BranchPoint make_point(const ParametricSystem& sys, const ParametricRhs& rhs, const State& s, int iters,
                       double tangent_t) {
    BranchPoint p;
    p.t = s.t;
    p.delta_t = rhs.delta_at(s.t);
    p.x = s.x;
    p.probe = sys.probe(s.x);
    p.newton_iters = iters;
    p.tangent_t = tangent_t;
    p.jacobian_eig = smallest_jacobian_eigenvalue(sys, s.t, s.x);
    return p;
}

}  // namespace

Branch continue_branch(const ParametricSystem& system, const ParametricRhs& rhs, const ContinuationConfig& cfg) {
    if (!(cfg.ds > 0.0 && cfg.ds_min > 0.0 && cfg.ds_max >= cfg.ds && cfg.ds_min <= cfg.ds))
        throw ConfigError("continuation steps must satisfy 0 < ds_min <= ds <= ds_max");
    if (!(cfg.t_start > 0.0)) throw ConfigError("continuation must start at t > 0");
    const double t_min = cfg.t_min > 0.0 ? cfg.t_min : cfg.t_start;

    Branch branch;
    State cur{system.initial_state(cfg.t_start), cfg.t_start};
    int iters = 0;
    if (!fixed_t_newton(system, cur.t, cur.x, cfg.tol, 50, &iters))
        throw ConvergenceError("no solution at the starting t", {});
    Eigen::VectorXd tau = tangent(system, cur, Eigen::VectorXd());
    branch.points.push_back(make_point(system, rhs, cur, iters, tau(tau.size() - 1)));

    double ds = cfg.ds;
    for (int step = 0; step < cfg.max_steps; ++step) {
        State next;
        int it = 0;
        bool ok;
        if (cfg.arclength) {
            ok = corrector(system, cur, tau, ds, cfg, next, it);
        } else {
            next = State{cur.x, cur.t + ds};
            ok = fixed_t_newton(system, next.t, next.x, cfg.tol, cfg.max_corrector, &it);
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < cfg.ds_min) {
                branch.termination = cfg.arclength ? "step underflow" : "step underflow (fold suspected)";
                return branch;
            }
            continue;
        }
        Eigen::VectorXd tau_next =
            cfg.arclength ? tangent(system, next, tau) : tangent(system, next, Eigen::VectorXd());
        const Eigen::Index tm = tau.size() - 1;

        if (cfg.arclength && tau(tm) * tau_next(tm) < 0.0) {
            // bisection on arclength for the zero of the tangent's t-component
            double lo = 0.0, hi = ds;
            State fold = next;
            Eigen::VectorXd fold_tau = tau_next;
            while (hi - lo > 1e-13 * ds) {
                const double mid = 0.5 * (lo + hi);
                State s;
                int ci = 0;
                if (!corrector(system, cur, tau, mid, cfg, s, ci)) break;
                const Eigen::VectorXd tm_tau = tangent(system, s, tau);
                if (tm_tau(tm) * tau(tm) > 0.0)
                    lo = mid;
                else
                    hi = mid;
                fold = s;
                fold_tau = tm_tau;
            }
            FoldMarker marker;
            marker.t = fold.t;
            marker.x = fold.x;
            marker.probe = system.probe(fold.x);
            marker.eig_before = branch.points.back().jacobian_eig;
            marker.eig_after = smallest_jacobian_eigenvalue(system, next.t, next.x);
            branch.folds.push_back(marker);
            BranchPoint fp = make_point(system, rhs, fold, 0, fold_tau(tm));
            fp.fold = true;
            branch.points.push_back(fp);
        }

        cur = next;
        tau = tau_next;
        branch.points.push_back(make_point(system, rhs, cur, it, tau(tm)));

        if (cur.t > cfg.t_max) {
            branch.termination = "reached t_max";
            return branch;
        }
        if (branch.points.back().probe > cfg.probe_max) {
            branch.termination = "probe exceeded limit";
            return branch;
        }
        if (!branch.folds.empty() && cur.t < t_min) {
            branch.termination = "returned below t_min after fold";
            return branch;
        }
        if (it <= 3) ds = std::min(cfg.ds_max, 1.5 * ds);
    }
    branch.termination = "max steps";
    return branch;
}

std::vector<Eigen::VectorXd> solutions_at(const ParametricSystem& system, const Branch& branch, double t,
                                          double tol) {
    std::vector<Eigen::VectorXd> out;
    const auto& pts = branch.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double t0 = pts[i].t, t1 = pts[i + 1].t;
        if ((t0 - t) * (t1 - t) > 0.0) continue;
        const double s = t1 != t0 ? (t - t0) / (t1 - t0) : 0.0;
        Eigen::VectorXd x = (1.0 - s) * pts[i].x + s * pts[i + 1].x;
        if (!system.admissible(x)) x = pts[i].x;
        if (!fixed_t_newton(system, t, x, tol, 60)) continue;
        bool dup = false;
        for (const auto& y : out)
            if ((y - x).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + y.cwiseAbs().maxCoeff())) dup = true;
        if (!dup) out.push_back(x);
    }
    std::sort(out.begin(), out.end(), [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return system.probe(a) < system.probe(b);
    });
    return out;
}

namespace {

Branch run_on_domain(const RadialProblem& problem, const ParametricRhs& rhs, const ContinuationConfig& config,
                     int N) {
    if (problem.domain == DomainKind::SphereConstant) {
        const ScalarSphereSystem sys(problem.cone, rhs);
        return continue_branch(sys, rhs, config);
    }
    const RadialDirichletSystem sys(problem, rhs, N);
    return continue_branch(sys, rhs, config);
}

}  // namespace

Branch continuation_supercritical(const RadialProblem& problem, double delta0, const ContinuationConfig& config,
                                  int N) {
    if (!(problem.p > problem.cone.k)) throw UnsupportedRegime("supercritical continuation needs p > k");
    const ParametricRhs rhs = ParametricRhs::supercritical(problem.p, delta0, problem.f(0.0));
    return run_on_domain(problem, rhs, config, N);
}

Branch general_rhs_continuation(const RadialProblem& problem, const ParametricRhs& rhs,
                                const ContinuationConfig& config, int N) {
    rhs.validate_growth(problem.cone.k);
    return run_on_domain(problem, rhs, config, N);
}

}  // namespace ksigma
