#pragma once

// Damped Newton for radial sigma_k equations written in the w-gauge,
//   sigma_k(W) = phi(r, w),
// on an annulus (Dirichlet), a ball (symmetry at 0, Dirichlet at r1) or the
// constant-state reduction on the round sphere.

#include <functional>
#include <string>
#include <vector>

#include "ksigma/conformal.hpp"
#include "ksigma/symfunc.hpp"

namespace ksigma {

enum class DomainKind { Annulus, Ball, SphereConstant };
const char* to_string(DomainKind d);

enum class RhsForm {
    WExponential,  // sigma_k(W) = f e^{a w}, a = (n-2)(k-p)/2
    VPower,        // sigma_k(V) = f v^p, rewritten as sigma_k(W) = ((n-2)/2)^{-k} f e^{a w}
};
const char* to_string(RhsForm f);

struct RadialProblem {
    ConeParams cone{3, 2};
    DomainKind domain = DomainKind::Annulus;
    double r0 = 0.0;        // annulus inner radius
    double r1 = 1.0;        // outer radius
    double w_inner = 0.0;   // Dirichlet data in the w-gauge
    double w_outer = 0.0;
    Background background;  // flat for Annulus/Ball, round sphere for SphereConstant
    RhsForm form = RhsForm::WExponential;
    double p = 0.0;
    std::function<double(double)> f = [](double) { return 1.0; };

    /// Optional direct phi(r, w) and d phi/dw, replacing the form/p/f description.
    std::function<double(double, double)> phi_override;
    std::function<double(double, double)> dphi_override;

    static RadialProblem annulus(const ConeParams& cone, double r0, double r1, double w_inner,
                                 double w_outer);
    static RadialProblem ball(const ConeParams& cone, double r1, double w_outer);
    static RadialProblem sphere_constant(const ConeParams& cone);

    /// a = (n-2)(k-p)/2.
    double exponent() const;
    /// f as it enters the w-gauge equation (includes ((n-2)/2)^{-k} for VPower).
    double f_w(double r) const;
    double phi(double r, double w) const;
    double dphi_dw(double r, double w) const;

    /// Throws ConfigError / UnsupportedRegime on inconsistent data.
    void validate() const;
};

struct SolverConfig {
    int N = 128;                 // grid intervals
    double tol = 1e-10;          // residual sup-norm
    int max_iter = 50;
    double min_damping = 1.0 / 1048576.0;

    // continuation controls
    double step = 0.05;
    double min_step = 1e-10;
    double max_step = 0.5;
    bool arclength = true;

    void validate() const;
};

/// Grid used for a problem: uniform on [r0, r1] (annulus), [0, r1] (ball),
/// a single node at 0 for the constant reduction.
std::vector<double> problem_grid(const RadialProblem& problem, int N);

struct Assembly {
    std::vector<double> residual;
    // tridiagonal Jacobian: lower[i] = dF_i/dw_{i-1}, diag[i], upper[i] = dF_i/dw_{i+1}
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    // worst radial cone value over interior nodes: min(b, a + theta b), or w'' at a ball center
    double cone_margin = 0.0;
    std::size_t worst_node = 0;
};

struct AssembleOptions {
    bool require_admissible = true;
};

/// Residual and Jacobian of the discretized equation on `r` (from problem_grid).
/// Throws AdmissibilityError if an interior node is not strictly admissible
/// and opt.require_admissible is set.
Assembly assemble(const RadialProblem& problem, const std::vector<double>& r,
                  const std::vector<double>& w, const AssembleOptions& opt = {});

/// Solves a tridiagonal system in place (Thomas); rhs becomes the solution.
void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>& rhs);

struct Solution {
    std::vector<double> r;
    std::vector<double> w;
    std::vector<double> residual;
    double residual_norm = 0.0;
    int iterations = 0;
    std::vector<double> history;      // residual sup-norms, starting with the initial iterate
    std::vector<double> damping;      // accepted step length per iteration
    double terminal_order = 0.0;      // observed convergence order near the end
    // sub/super bracket (subcritical solves)
    bool bracket_checked = false;
    bool bracket_ok = false;
    double bracket_shift = 0.0;

    /// v = e^{-(n-2)/2 w}
    std::vector<double> v(const ConeParams& cone) const;
};

/// Strictly admissible starting iterate: u = e^w = alpha + beta r^2 matched to the
/// boundary data (annulus needs 0 < w_outer - w_inner < 2 log(r1/r0)).
std::vector<double> default_initial_guess(const RadialProblem& problem, const std::vector<double>& r);

/// Cone-guarded damped Newton. Throws ConvergenceError (with history) or
/// AdmissibilityError if the initial iterate is not admissible.
Solution newton_solve(const RadialProblem& problem, std::vector<double> initial,
                      const SolverConfig& config = {});
Solution newton_solve(const RadialProblem& problem, const SolverConfig& config = {});

/// p < k regime (a > 0): Newton from `seed` (default initializer if empty) plus a
/// check that the result lies between seed - c and seed + c, the constant shifts
/// that make the seed a sub- and a supersolution.
Solution solve_subcritical(const RadialProblem& problem, const SolverConfig& config = {},
                           std::vector<double> seed = {});

struct EigenvalueResult {
    double theta = 0.0;                 // sigma_k(V) = theta f v^k
    std::vector<double> a_values;
    std::vector<double> theta_a;        // e^{a inf w_a}
    std::vector<double> extrapolated;   // Richardson sequence
    Solution normalized;                // inf w = 0
    double residual = 0.0;              // sup |sigma_k(W) - theta f_w| at the returned state
};

/// p = k regime by the a -> 0 limit, a = 0.5 * 2^{-j}, j = 0..levels-1.
/// Implemented for the constant reduction only.
EigenvalueResult solve_eigenvalue(const RadialProblem& problem, const SolverConfig& config = {},
                                  int levels = 9);

}  // namespace ksigma
