#pragma once

// Homotopy sigma_k(V) = t * rho(t, v) followed in t by pseudo-arclength
// continuation, with fold (turning point) detection.

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "ksigma/solver.hpp"

namespace ksigma {

/// delta0 for t <= 1, 1 for t >= 2, quintic smoothstep in between.
double delta_schedule(double delta0, double t);
double delta_schedule_derivative(double delta0, double t);

struct PowerTerm {
    double coeff = 1.0;
    double power = 0.0;
};

enum class GrowthClass {
    None,
    BoundedBelowSuperlinear,  // rho >= c0 > 0 and v^{-k} rho -> infinity as v -> infinity
    VanishingSuperlinear,     // v^{-k} rho -> 0 as v -> 0 and -> infinity as v -> infinity
};
const char* to_string(GrowthClass g);

/// rho(t, v) in sigma_k(V) = t rho(t, v).
struct ParametricRhs {
    enum class Kind { Supercritical, General };
    Kind kind = Kind::Supercritical;
    // Supercritical: rho = delta_t + f v^p
    double delta0 = 1.0;
    double f = 1.0;
    double p = 4.0;
    // General: rho = sum c_i v^{q_i}
    std::vector<PowerTerm> terms;
    GrowthClass growth = GrowthClass::None;

    static ParametricRhs supercritical(double p, double delta0, double f = 1.0);
    static ParametricRhs general(std::vector<PowerTerm> terms, GrowthClass growth);

    double rho(double t, double v) const;
    double rho_v(double t, double v) const;
    double rho_t(double t, double v) const;
    double delta_at(double t) const;

    /// Checks the declared growth class at v = v_lo and v = v_hi for order k.
    /// Throws ConfigError when the samples contradict the declaration.
    void validate_growth(int k, double v_lo = 1e-6, double v_hi = 1e6) const;
};

/// F(x, t) = 0 with x in R^m.
class ParametricSystem {
public:
    virtual ~ParametricSystem() = default;
    virtual std::size_t size() const = 0;
    virtual void evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& Fx,
                          Eigen::VectorXd& Ft) const = 0;
    /// Strict admissibility of the state.
    virtual bool admissible(const Eigen::VectorXd& x) const = 0;
    /// Scalar summary (v at a probe node).
    virtual double probe(const Eigen::VectorXd& x) const = 0;
    /// Starting state at small t.
    virtual Eigen::VectorXd initial_state(double t) const = 0;
};

/// Constant states on the round sphere, x = (v): A v^k = t rho(t, v),
/// A = C(n,k) ((n-2)/4)^k.
class ScalarSphereSystem final : public ParametricSystem {
public:
    ScalarSphereSystem(const ConeParams& cone, ParametricRhs rhs);
    std::size_t size() const override { return 1; }
    void evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& Fx,
                  Eigen::VectorXd& Ft) const override;
    bool admissible(const Eigen::VectorXd& x) const override { return x(0) > 0.0; }
    double probe(const Eigen::VectorXd& x) const override { return x(0); }
    /// Smallest positive root, found by a log-scale scan plus bisection.
    Eigen::VectorXd initial_state(double t) const override;

    double leading_coefficient() const noexcept { return coeff_; }

private:
    ConeParams cone_;
    ParametricRhs rhs_;
    double coeff_;
};

/// Radial annulus or ball problem in the w-gauge with fixed Dirichlet data:
/// sigma_k(W) = ((n-2)/2)^{-k} v^{-k} t rho(t, v), v = e^{-(n-2)w/2}.
class RadialDirichletSystem final : public ParametricSystem {
public:
    RadialDirichletSystem(RadialProblem base, ParametricRhs rhs, int N);
    std::size_t size() const override { return r_.size(); }
    void evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& Fx,
                  Eigen::VectorXd& Ft) const override;
    bool admissible(const Eigen::VectorXd& x) const override;
    double probe(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd initial_state(double t) const override;

    const std::vector<double>& grid() const noexcept { return r_; }

private:
    RadialProblem problem_at(double t) const;
    RadialProblem base_;
    ParametricRhs rhs_;
    std::vector<double> r_;
};

struct ContinuationConfig {
    double t_start = 1e-4;
    double t_min = 0.0;       // stop when t drops below this after a fold (0: use t_start)
    double t_max = 10.0;      // stop beyond this t
    double probe_max = 1e3;   // stop when the probe exceeds this
    double ds = 0.02;
    double ds_min = 1e-10;
    double ds_max = 0.25;
    int max_steps = 2000;
    int max_corrector = 12;
    double tol = 1e-12;       // corrector residual (sup norm)
    bool arclength = true;    // false: natural parameter stepping in t
    double fold_tol = 1e-8;   // relative tolerance on t at the fold
};

struct BranchPoint {
    double t = 0.0;
    double delta_t = 0.0;
    Eigen::VectorXd x;
    double probe = 0.0;
    int newton_iters = 0;
    double tangent_t = 0.0;
    double jacobian_eig = 0.0;  // eigenvalue of F_x of smallest magnitude (real part)
    bool fold = false;
};

struct FoldMarker {
    double t = 0.0;
    Eigen::VectorXd x;
    double probe = 0.0;
    double eig_before = 0.0;
    double eig_after = 0.0;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<FoldMarker> folds;
    std::string termination;
};

/// Follows F(x, t) = 0 from the small-t state.
Branch continue_branch(const ParametricSystem& system, const ParametricRhs& rhs,
                       const ContinuationConfig& config = {});

/// Solutions at a fixed t: every branch segment that crosses t is refined by Newton.
std::vector<Eigen::VectorXd> solutions_at(const ParametricSystem& system, const Branch& branch, double t,
                                          double tol = 1e-13);

/// Eigenvalue of the smallest magnitude (real part) of F_x at (x, t).
double smallest_jacobian_eigenvalue(const ParametricSystem& system, double t, const Eigen::VectorXd& x);

/// sigma_k(V) = t (delta_t + f v^p) for p > k on the constant reduction or an annulus.
Branch continuation_supercritical(const RadialProblem& problem, double delta0,
                                  const ContinuationConfig& config = {}, int N = 64);

/// sigma_k(V) = t rho(v) for a user rho with a declared growth class.
Branch general_rhs_continuation(const RadialProblem& problem, const ParametricRhs& rhs,
                                const ContinuationConfig& config = {}, int N = 64);

}  // namespace ksigma
