#include "ksigma/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "ksigma/error.hpp"

namespace ksigma {

const char* to_string(Gauge g) {
    switch (g) {
        case Gauge::Chi: return "chi";
        case Gauge::V: return "v";
        case Gauge::U: return "u";
        case Gauge::W: return "w";
    }
    return "?";
}

Background Background::flat(int n) {
    Background b;
    b.kind = BackgroundKind::Flat;
    b.schouten = SymMatrix(n);
    b.scalar_curvature = 0.0;
    return b;
}

Background Background::round_sphere(int n) {
    Background b;
    b.kind = BackgroundKind::RoundSphereStereographic;
    b.schouten = SymMatrix::identity(n) * 0.5;
    b.scalar_curvature = double(n) * double(n - 1);
    return b;
}

Background Background::explicit_data(SymMatrix schouten, double scalar_curvature) {
    if (!schouten.is_symmetric()) throw DomainError("background Schouten data must be symmetric");
    Background b;
    b.kind = BackgroundKind::Explicit;
    b.schouten = std::move(schouten);
    b.scalar_curvature = scalar_curvature;
    return b;
}

void ConformalJet::validate() const {
    const int n = dim();
    if (n < 3) throw DomainError("conformal jets need dimension n >= 3");
    if (int(gradient.size()) != n) throw DomainError("jet gradient length does not match Hessian");
    if (background.dim() != n) throw DomainError("background dimension does not match jet");
    if (!hessian.is_symmetric()) throw DomainError("jet Hessian must be symmetric");
    if (gauge != Gauge::W && !(value > 0.0))
        throw DomainError(std::string("gauge ") + to_string(gauge) + " requires a positive value");
    if (!std::isfinite(value)) throw DomainError("jet value must be finite");
}

namespace {

double beta(int n) { return 0.5 * double(n - 2); }

// Every gauge other than w is e^{c w}.
double gauge_exponent(Gauge g, int n) {
    switch (g) {
        case Gauge::Chi: return -2.0;
        case Gauge::V: return -beta(n);
        case Gauge::U: return 1.0;
        case Gauge::W: return 0.0;
    }
    return 0.0;
}

ConformalJet to_w(const ConformalJet& jet) {
    if (jet.gauge == Gauge::W) return jet;
    const int n = jet.dim();
    const double c = gauge_exponent(jet.gauge, n);
    const double g = jet.value;
    ConformalJet out;
    out.gauge = Gauge::W;
    out.background = jet.background;
    out.value = std::log(g) / c;
    out.gradient.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) out.gradient[i] = jet.gradient[i] / (c * g);
    out.hessian = SymMatrix(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.hessian(i, j) =
                (jet.hessian(i, j) / g - jet.gradient[i] * jet.gradient[j] / (g * g)) / c;
    return out;
}

ConformalJet from_w(const ConformalJet& w, Gauge target) {
    if (target == Gauge::W) return w;
    const int n = w.dim();
    const double c = gauge_exponent(target, n);
    const double g = std::exp(c * w.value);
    ConformalJet out;
    out.gauge = target;
    out.background = w.background;
    out.value = g;
    out.gradient.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) out.gradient[i] = c * g * w.gradient[i];
    out.hessian = SymMatrix(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.hessian(i, j) =
                c * g * w.hessian(i, j) + c * c * g * w.gradient[i] * w.gradient[j];
    return out;
}

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

void require_gauge(const ConformalJet& jet, Gauge g, const char* op) {
    if (jet.gauge != g)
        throw DomainError(std::string(op) + " expects a jet in the " + to_string(g) + " gauge");
    jet.validate();
}

}  // namespace

ConformalJet convert_gauge(const ConformalJet& jet, Gauge target) {
    jet.validate();
    if (jet.gauge == target) return jet;
    return from_w(to_w(jet), target);
}

SymMatrix matrix_W(const ConformalJet& jet) {
    require_gauge(jet, Gauge::W, "matrix_W");
    const int n = jet.dim();
    const double half_g2 = 0.5 * norm2(jet.gradient);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = jet.hessian(i, j) + jet.gradient[i] * jet.gradient[j] +
                      jet.background.schouten(i, j) - (i == j ? half_g2 : 0.0);
    return m;
}

SymMatrix matrix_U(const ConformalJet& jet) {
    require_gauge(jet, Gauge::U, "matrix_U");
    const int n = jet.dim();
    const double u = jet.value;
    const double shift = norm2(jet.gradient) / (2.0 * u);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = jet.hessian(i, j) + u * jet.background.schouten(i, j) - (i == j ? shift : 0.0);
    return m;
}

SymMatrix matrix_V(const ConformalJet& jet) {
    require_gauge(jet, Gauge::V, "matrix_V");
    const int n = jet.dim();
    const double v = jet.value;
    const double nm2 = double(n - 2);
    const double shift = norm2(jet.gradient) / (nm2 * v);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = -jet.hessian(i, j) + double(n) / nm2 * jet.gradient[i] * jet.gradient[j] / v +
                      0.5 * nm2 * v * jet.background.schouten(i, j) - (i == j ? shift : 0.0);
    return m;
}

EigenTuple schouten_eigs_wrt_g(const ConformalJet& jet) {
    const ConformalJet w = convert_gauge(jet, Gauge::W);
    const double scale = std::exp(2.0 * w.value);
    auto eig = symmetric_eigenvalues(matrix_W(w));
    for (double& e : eig) e *= scale;
    return EigenTuple(std::move(eig));
}

RadialSample kelvin_transform(const RadialSample& v, int n) {
    if (v.r.size() != v.values.size()) throw DomainError("radial sample size mismatch");
    if (v.r.empty()) return {};
    if (!(v.r.front() > 0.0)) throw DomainError("Kelvin transform requires r_min > 0");
    for (std::size_t i = 1; i < v.r.size(); ++i)
        if (!(v.r[i] > v.r[i - 1])) throw DomainError("radial grid must be strictly increasing");
    RadialSample out;
    const std::size_t m = v.r.size();
    out.r.resize(m);
    out.values.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = m - 1 - i;
        const double r_src = v.r[src];
        out.r[i] = 1.0 / r_src;
        // r^{2-n} v(1/r) evaluated at r = 1/r_src
        out.values[i] = std::pow(r_src, double(n - 2)) * v.values[src];
    }
    return out;
}

double conformal_laplacian_residual(const ConformalJet& jet) {
    require_gauge(jet, Gauge::V, "conformal_laplacian_residual");
    const int n = jet.dim();
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += jet.hessian(i, i);
    return -trace + double(n - 2) / (4.0 * double(n - 1)) * jet.background.scalar_curvature * jet.value;
}

double exponent_from_power(int n, int k, double p) { return 0.5 * double(n - 2) * (double(k) - p); }

double v_power_prefactor(int n, int k) { return std::pow(beta(n), -double(k)); }

}  // namespace ksigma
