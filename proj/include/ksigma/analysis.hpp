#pragma once

// Barrier operators, admissibility-preserving operations on sampled fields and
// geometric diagnostics (Harnack ratio, geodesic volume ratio).

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ksigma/conformal.hpp"
#include "ksigma/grid_field.hpp"
#include "ksigma/radial.hpp"
#include "ksigma/symfunc.hpp"

namespace ksigma {

// ---------------------------------------------------------------- barriers

struct PucciParams {
    double delta = 0.0;

    /// delta = (n-k)/(n(k-1)); requires k >= 2.
    static PucciParams from_cone(const ConeParams& cone);
};

/// Pucci minimal operator: min lambda_i + delta * sum lambda_i.
double pucci_min(const EigenTuple& hessian_eigs, const PucciParams& params);

/// Hessian eigenvalues of the radial barrier r^{2-n/k}: one radial value
/// alpha(alpha-1) r^{alpha-2}, then n-1 tangential values alpha r^{alpha-2}.
EigenTuple barrier_hessian_eigs(const ConeParams& cone, double r);

struct PLaplacianReport {
    double p = 0.0;                 // p - 2 = n(k-1)/(n-k)
    std::vector<double> r;
    std::vector<double> delta_p;    // radial p-Laplacian of u = e^w
    std::vector<double> ratio;      // delta_p / (u |u'|^{p-2})
    double inf_ratio = 0.0;
    std::size_t worst_node = 0;
    bool nonnegative(double tol = 0.0) const noexcept { return inf_ratio >= -tol; }
};

/// Radial p-Laplacian of u = e^w for a w-gauge profile. Requires k < n.
PLaplacianReport p_laplacian_check(const RadialProfile& w_profile);

// ------------------------------------------------- operations on grid fields

/// Convolution with the bump (1-s^2)^4, s = |y|/eps, normalized to unit
/// discrete mass. The result lives on the box shrunk by the kernel radius.
GridField mollify(const GridField& f, double eps);

GridField pointwise_max(const GridField& f, const GridField& g);
/// Nodewise max; derivatives taken from the larger input (FD recomputed if
/// either input is not analytic).
RadialProfile pointwise_max(const RadialProfile& f, const RadialProfile& g);

/// true where no node within `kappa` cells has a different sign of f - g,
/// i.e. the max is away from the contact set.
std::vector<bool> kink_mask(const GridField& f, const GridField& g, int kappa = 3);
std::vector<bool> kink_mask(const RadialProfile& f, const RadialProfile& g, int kappa = 3);

struct GridAdmissibility {
    std::size_t checked = 0;
    std::size_t failed = 0;
    double worst_sigma = 0.0;            // smallest sigma_j (j <= k) seen
    std::optional<std::size_t> worst_node;
    std::vector<std::size_t> failed_nodes;
    bool ok() const noexcept { return failed == 0 && checked > 0; }
};

struct GridAdmissibilityOptions {
    bool strict = true;   // open cone
    double margin = 0.0;
    int border = 1;       // nodes skipped next to the box boundary
    const std::vector<bool>* mask = nullptr;  // only nodes with mask[q] = true
};

/// Cone test of the matrix associated with `gauge` (flat background) at
/// interior nodes using second-order central differences. A 2-d field is
/// treated as constant in the remaining cone.n - 2 directions.
GridAdmissibility grid_admissibility(const GridField& f, Gauge gauge, const ConeParams& cone,
                                     const GridAdmissibilityOptions& opt = {});

/// Per-node radial cone test of a profile with the given tolerance mode.
std::vector<bool> profile_admissibility(const RadialProfile& p, bool strict, double c_fd = 10.0);

// -------------------------------------------------------------- diagnostics

struct HarnackEstimate {
    double c_est = 0.0;     // sup log(chi(x)/chi(y)) / |x-y|^{2-n/k}
    double exponent = 0.0;
    Point x{0, 0, 0};
    Point y{0, 0, 0};
    std::size_t pairs = 0;
};

struct HarnackOptions {
    double min_distance = 0.0;   // 0 means 2 h
    std::size_t max_nodes = 20000;  // larger grids are strided deterministically
};

/// Empirical Harnack constant of a chi-gauge grid field. Non-finite samples are skipped.
HarnackEstimate harnack_ratio(const GridField& chi, const ConeParams& cone,
                              const HarnackOptions& opt = {});
/// Radial version: pairs of points on a line through the origin, on the same
/// side (distance |r_i - r_j|) and on opposite sides (r_i + r_j).
HarnackEstimate harnack_ratio(const RadialSample& chi, const ConeParams& cone,
                              const HarnackOptions& opt = {});

/// Area of the unit sphere S^{n-1}.
double unit_sphere_area(int n);

enum class VolumeCenter { Origin, Infinity };

struct VolumeCurve {
    int n = 3;
    double omega_n = 0.0;
    std::vector<double> r;       // geodesic radii
    std::vector<double> rho;     // coordinate radius of the geodesic sphere
    std::vector<double> volume;
    std::vector<double> Q;       // volume / r^n
};

/// Geodesic balls of g = e^{-2w} g_e centered at the origin (or at the point
/// at infinity, via the inversion w(1/r) + 2 log r). `w` is evaluated on
/// (0, infinity). Throws DomainError if e^{-w} is not integrable at the center.
VolumeCurve volume_ratio(const std::function<double(double)>& w, int n,
                         std::span<const double> geodesic_radii,
                         VolumeCenter center = VolumeCenter::Origin, double rel_tol = 1e-10);

/// Volume of {rho1 < |x| < rho2} in g = e^{-2w} g_e.
double annulus_volume(const std::function<double(double)>& w, int n, double rho1, double rho2,
                      double rel_tol = 1e-12);

/// Least-squares fit Q/(omega_n/n) = 1 + c2 r^2 + c4 r^4 over r <= r_fit; returns c2.
double fit_quadratic_coefficient(const VolumeCurve& curve, double r_fit);

/// Largest relative increase Q(r_{i+1})/Q(r_i) - 1 (0 if non-increasing).
double max_relative_increase(const VolumeCurve& curve);

struct EndCount {
    int m = 0;
    double m_real = 0.0;
    double residual = 0.0;    // |m_real - m|
    double tail_slope = 0.0;  // d log Q / d log r over the last two samples
    bool conclusive = false;
};

/// m = round(n Q(r_max) / omega_n), inconclusive if |tail_slope| > slope_tol.
EndCount end_count_limit(const VolumeCurve& curve, double slope_tol = 1e-3);

}  // namespace ksigma
