#pragma once

// Conformal gauges g = chi g0 = v^{4/(n-2)} g0 = u^{-2} g0 = e^{-2w} g0 and the
// matrices V, U, W whose eigenvalues decide k-admissibility. All matrices are
// written in a g0-orthonormal frame at the evaluation point.

#include <vector>

#include "ksigma/symfunc.hpp"

namespace ksigma {

enum class Gauge { Chi, V, U, W };

const char* to_string(Gauge g);

enum class BackgroundKind { Flat, RoundSphereStereographic, Explicit };

/// Pointwise background data: Schouten tensor A_{g0} and scalar curvature R_{g0}.
struct Background {
    BackgroundKind kind = BackgroundKind::Flat;
    SymMatrix schouten;
    double scalar_curvature = 0.0;

    static Background flat(int n);
    /// Unit round sphere: A = I/2, R = n(n-1).
    static Background round_sphere(int n);
    static Background explicit_data(SymMatrix schouten, double scalar_curvature);

    int dim() const noexcept { return schouten.dim(); }
};

/// (value, gradient, Hessian) of a conformal factor in a declared gauge.
struct ConformalJet {
    Gauge gauge = Gauge::W;
    double value = 0.0;
    std::vector<double> gradient;
    SymMatrix hessian;
    Background background;

    int dim() const noexcept { return hessian.dim(); }
    /// Throws DomainError on shape mismatch or a non-positive value in the chi/v/u gauges.
    void validate() const;
};

/// Exact chain-rule conversion between gauges.
ConformalJet convert_gauge(const ConformalJet& jet, Gauge target);

/// w_ij + w_i w_j - |Dw|^2/2 I + A
SymMatrix matrix_W(const ConformalJet& w_jet);
/// u_ij - |Du|^2/(2u) I + u A
SymMatrix matrix_U(const ConformalJet& u_jet);
/// -v_ij + n/(n-2) v_i v_j / v - |Dv|^2/((n-2) v) I + (n-2)/2 v A
SymMatrix matrix_V(const ConformalJet& v_jet);

/// Eigenvalues of A_g with respect to g: e^{2w} lambda(W).
EigenTuple schouten_eigs_wrt_g(const ConformalJet& jet);

/// Radial samples of a scalar field, r strictly increasing and positive.
struct RadialSample {
    std::vector<double> r;
    std::vector<double> values;
};

/// Kelvin inversion x -> x/|x|^2 of a radial v-gauge field:
/// v_psi(r) = r^{2-n} v(1/r). The returned grid is increasing.
RadialSample kelvin_transform(const RadialSample& v, int n);

/// -tr(D^2 v) + (n-2)/(4(n-1)) R_{g0} v for a v-gauge jet.
double conformal_laplacian_residual(const ConformalJet& v_jet);

/// Exponent a = (n-2)(k-p)/2 turning sigma_k(V) = f v^p into sigma_k(W) = f' e^{a w}.
double exponent_from_power(int n, int k, double p);

/// Factor ((n-2)/2)^{-k} with f' = f * factor in the conversion above.
double v_power_prefactor(int n, int k);

}  // namespace ksigma
