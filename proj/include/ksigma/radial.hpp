#pragma once

// Radial reduction of the conformal k-Hessian operator: for radial w the
// matrix W is diag(b, ..., b, a) with a = w'' + w'^2/2, b = w'/r - w'^2/2.

#include <functional>
#include <string>
#include <vector>

#include "ksigma/grid_field.hpp"
#include "ksigma/symfunc.hpp"

namespace ksigma {

/// Radial function w(r) with first and second derivative samples.
struct RadialProfile {
    std::vector<double> r;
    std::vector<double> w;
    std::vector<double> dw;
    std::vector<double> d2w;
    ConeParams cone;
    bool analytic = false;  // derivatives exact rather than finite-difference

    std::size_t size() const noexcept { return r.size(); }
    void validate() const;

    /// Samples w and its exact derivatives.
    static RadialProfile from_function(std::vector<double> r, const ConeParams& cone,
                                       const std::function<double(double)>& w,
                                       const std::function<double(double)>& dw,
                                       const std::function<double(double)>& d2w);
    /// Finite-difference derivatives (3-point, non-uniform; one-sided at the ends).
    static RadialProfile from_samples(std::vector<double> r, std::vector<double> w,
                                      const ConeParams& cone);
};

/// r_i = r_max * q^i, i = 0..count-1, returned in increasing order.
std::vector<double> geometric_grid(double r_max, double q, int count);
/// N+1 equally spaced nodes on [r0, r1].
std::vector<double> uniform_grid(double r0, double r1, int intervals);

/// First and second finite-difference derivatives on a non-uniform grid.
void finite_difference_derivatives(const std::vector<double>& r, const std::vector<double>& w,
                                   std::vector<double>& dw, std::vector<double>& d2w);

struct RadialAB {
    std::vector<double> a;
    std::vector<double> b;
};

RadialAB ab_reduce(const RadialProfile& p);

/// C(n-1,k) b^k + C(n-1,k-1) a b^{k-1}
double sigma_k_radial(double a, double b, const ConeParams& cone);
std::vector<double> sigma_k_radial(const RadialAB& ab, const ConeParams& cone);
/// Partial derivatives of sigma_k_radial with respect to a and b.
void sigma_k_radial_partials(double a, double b, const ConeParams& cone, double& d_a, double& d_b);

/// Per-node radial cone test (k > n/2 required): closure b >= -tol, a + theta b >= -tol;
/// open b > tol, a + theta b > tol.
std::vector<bool> radial_admissible(const RadialAB& ab, const ConeParams& cone, bool strict,
                                    double tol = 0.0);

/// Per-node tolerance for inequality checks on a profile: tiny for analytic
/// derivatives, c_fd (h/r)^2 relative for finite differences. Scaled by the
/// magnitude of the terms entering a and b.
std::vector<double> profile_tolerance(const RadialProfile& p, double c_fd = 10.0);

struct RwMonotoneReport {
    double min_rw = 0.0;
    double max_rw = 0.0;
    double worst_decrease = 0.0;   // largest drop of r w' between consecutive nodes
    double worst_excess = 0.0;     // max(0, r w' - 2, -r w')
    std::size_t worst_node = 0;
    bool ok = true;
};

/// Checks 0 <= r w' <= 2 and monotonicity of r w' up to `tol` (absolute).
RwMonotoneReport check_rw_monotone(const RadialProfile& p, double tol = 1e-9);

enum class SingularityClass { Fundamental, Holder };
const char* to_string(SingularityClass c);

struct SingularityReport {
    SingularityClass kind = SingularityClass::Holder;
    double offset = 0.0;          // C in w = 2 log r + C
    double offset_spread = 0.0;   // spread of w - 2 log r over the fitted nodes
    double alpha_est = 0.0;       // Hoelder exponent estimate
    bool alpha_saturated = false; // w' bounded: Lipschitz, reported as alpha_est = 1
    double rw_limit = 0.0;        // extrapolated lim r w'
    double fitted_slope = 0.0;    // d log w' / d log r near 0
    double fit_rms = 0.0;
    int fit_nodes = 0;
};

struct ClassifyOptions {
    double eps_class = 0.05;
    double c_fd = 10.0;
};

/// Fundamental (w = 2 log r + C) versus Hoelder dichotomy for an admissible
/// profile sampled toward r -> 0 (ideally on a geometric grid).
SingularityReport classify_singularity(const RadialProfile& p, const ClassifyOptions& opt = {});

struct EnvelopeProfile {
    std::vector<double> r;
    std::vector<double> wtilde;
    Point center{0, 0, 0};
    std::string provenance;
};

struct EnvelopeOptions {
    double r_start = 0.0;    // first radius (0 means the center itself)
    double dr = 0.0;         // radial step; 0 means grid spacing
    double r_max = 0.0;      // 0 means distance from center to boundary
    int sphere_samples = 0;  // 0 chooses from radius/spacing
};

/// sup of w over closed balls B(center, r); equals the sublevel-set distance
/// profile inf{h : dist(center, boundary of {w < h}) > r}.
EnvelopeProfile radial_envelope(const GridField& f, const Point& center,
                                const EnvelopeOptions& opt = {});

struct InequalityViolation {
    double r = 0.0;
    int which = 0;  // 1: w'/r - w'^2/2 >= 0, 2: (w'' + w'/r) - (1-theta)(w'/r - w'^2/2) >= 0
    double value = 0.0;
};

struct EnvelopeCheckReport {
    double min_b = 0.0;
    double min_ab = 0.0;
    double tau = 0.0;
    std::vector<InequalityViolation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

/// Evaluates both radial admissibility inequalities at interior envelope nodes
/// with central differences; values below -tau are reported.
EnvelopeCheckReport envelope_viscosity_check(const EnvelopeProfile& e, const ConeParams& cone,
                                             double tau);

}  // namespace ksigma
