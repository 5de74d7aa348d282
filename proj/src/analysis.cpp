#include "ksigma/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "ksigma/error.hpp"

namespace ksigma {

PucciParams PucciParams::from_cone(const ConeParams& cone) { return PucciParams{cone.delta_gv()}; }

double pucci_min(const EigenTuple& hessian_eigs, const PucciParams& params) {
    const auto& v = hessian_eigs.values();
    return *std::min_element(v.begin(), v.end()) + params.delta * hessian_eigs.sum();
}

EigenTuple barrier_hessian_eigs(const ConeParams& cone, double r) {
    if (!(r > 0.0)) throw DomainError("barrier Hessian needs r > 0");
    const double alpha = cone.alpha();
    const double base = std::pow(r, alpha - 2.0);
    std::vector<double> eig(std::size_t(cone.n), alpha * base);
    eig[0] = alpha * (alpha - 1.0) * base;
    return EigenTuple(std::move(eig));
}

PLaplacianReport p_laplacian_check(const RadialProfile& p) {
    p.validate();
    const int n = p.cone.n, k = p.cone.k;
    if (k == n) throw UnsupportedRegime("p-Laplacian reduction needs k < n (p is infinite for k = n)");
    PLaplacianReport rep;
    rep.p = 2.0 + double(n) * double(k - 1) / double(n - k);
    rep.inf_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p.r[i];
        const double u = std::exp(p.w[i]);
        const double du = u * p.dw[i];
        const double d2u = u * (p.d2w[i] + p.dw[i] * p.dw[i]);
        // r^{1-n} (r^{n-1} |u'|^{p-2} u')' = |u'|^{p-2} ((p-1) u'' + (n-1) u'/r)
        const double lap = std::pow(std::abs(du), rep.p - 2.0) * ((rep.p - 1.0) * d2u + (n - 1) * du / r);
        // Same quantity divided by u |u'|^{p-2}, written in w to stay finite where u' = 0.
        const double ratio = (rep.p - 1.0) * (p.d2w[i] + p.dw[i] * p.dw[i]) + (n - 1) * p.dw[i] / r;
        rep.r.push_back(r);
        rep.delta_p.push_back(lap);
        rep.ratio.push_back(ratio);
        if (ratio < rep.inf_ratio) {
            rep.inf_ratio = ratio;
            rep.worst_node = i;
        }
    }
    return rep;
}

namespace {

std::vector<std::array<int, 3>> kernel_offsets(int dims, int reach) {
    std::vector<std::array<int, 3>> out;
    const int zr = dims == 3 ? reach : 0;
    for (int a = -reach; a <= reach; ++a)
        for (int b = -reach; b <= reach; ++b)
            for (int c = -zr; c <= zr; ++c) out.push_back({a, b, c});
    return out;
}

}  // namespace

GridField mollify(const GridField& f, double eps) {
    const double h = f.spacing();
    if (eps < 2.0 * h * (1.0 - 1e-12)) throw DomainError("mollification radius must be at least 2 grid spacings");
    const int reach = int(std::floor(eps / h + 1e-12));
    std::array<int, 3> shape = f.shape();
    Point origin = f.origin();
    for (int a = 0; a < f.dims(); ++a) {
        shape[a] -= 2 * reach;
        origin[a] += reach * h;
        if (shape[a] < 3)
            throw DomainError("grid too small for the mollification radius (needs an eps-enlarged box)");
    }
    std::vector<std::pair<std::array<int, 3>, double>> kernel;
    double mass = 0.0;
    for (const auto& o : kernel_offsets(f.dims(), reach)) {
        const double s = h * std::sqrt(double(o[0] * o[0] + o[1] * o[1] + o[2] * o[2])) / eps;
        if (s >= 1.0) continue;
        const double q = 1.0 - s * s;
        const double wgt = q * q * q * q;
        kernel.push_back({o, wgt});
        mass += wgt;
    }
    for (auto& kv : kernel) kv.second /= mass;

    GridField out(f.dims(), shape, h, origin);
    const int zoff = f.dims() == 3 ? reach : 0;
    for (int i = 0; i < shape[0]; ++i)
        for (int j = 0; j < shape[1]; ++j)
            for (int l = 0; l < shape[2]; ++l) {
                double acc = 0.0;
                for (const auto& [o, wgt] : kernel)
                    acc += wgt * f.at(i + reach + o[0], j + reach + o[1], l + zoff + o[2]);
                out.at(i, j, l) = acc;
            }
    return out;
}

namespace {

void require_same_grid(const GridField& f, const GridField& g) {
    if (f.dims() != g.dims() || f.shape() != g.shape() || f.spacing() != g.spacing() ||
        f.origin() != g.origin())
        throw DomainError("grid fields are defined on different grids");
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

GridField pointwise_max(const GridField& f, const GridField& g) {
    require_same_grid(f, g);
    GridField out(f);
    for (std::size_t q = 0; q < out.size(); ++q) out.values()[q] = std::max(f.values()[q], g.values()[q]);
    out.singular_node.reset();
    return out;
}

RadialProfile pointwise_max(const RadialProfile& f, const RadialProfile& g) {
    if (f.r != g.r) throw DomainError("profiles are sampled on different grids");
    RadialProfile out = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (g.w[i] > f.w[i]) {
            out.w[i] = g.w[i];
            out.dw[i] = g.dw[i];
            out.d2w[i] = g.d2w[i];
        }
    }
    out.analytic = f.analytic && g.analytic;
    if (!out.analytic) finite_difference_derivatives(out.r, out.w, out.dw, out.d2w);
    return out;
}

std::vector<bool> kink_mask(const GridField& f, const GridField& g, int kappa) {
    require_same_grid(f, g);
    const auto& sh = f.shape();
    std::vector<int> s(f.size());
    for (std::size_t q = 0; q < f.size(); ++q) s[q] = sign_of(f.values()[q] - g.values()[q]);
    std::vector<bool> mask(f.size(), true);
    const int kz = f.dims() == 3 ? kappa : 0;
    for (std::size_t q = 0; q < f.size(); ++q) {
        if (s[q] == 0) {
            mask[q] = false;
            continue;
        }
        const auto m = f.multi_index(q);
        bool clear = true;
        for (int a = std::max(0, m[0] - kappa); clear && a <= std::min(sh[0] - 1, m[0] + kappa); ++a)
            for (int b = std::max(0, m[1] - kappa); clear && b <= std::min(sh[1] - 1, m[1] + kappa); ++b)
                for (int c = std::max(0, m[2] - kz); clear && c <= std::min(sh[2] - 1, m[2] + kz); ++c)
                    if (s[f.index(a, b, c)] != s[q]) clear = false;
        mask[q] = clear;
    }
    return mask;
}

std::vector<bool> kink_mask(const RadialProfile& f, const RadialProfile& g, int kappa) {
    if (f.r != g.r) throw DomainError("profiles are sampled on different grids");
    const std::size_t m = f.size();
    std::vector<int> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = sign_of(f.w[i] - g.w[i]);
    std::vector<bool> mask(m, true);
    for (std::size_t i = 0; i < m; ++i) {
        if (s[i] == 0) {
            mask[i] = false;
            continue;
        }
        const std::size_t lo = i >= std::size_t(kappa) ? i - kappa : 0;
        const std::size_t hi = std::min(m - 1, i + std::size_t(kappa));
        for (std::size_t j = lo; j <= hi; ++j)
            if (s[j] != s[i]) mask[i] = false;
    }
    return mask;
}

GridAdmissibility grid_admissibility(const GridField& f, Gauge gauge, const ConeParams& cone,
                                     const GridAdmissibilityOptions& opt) {
    const int dims = f.dims();
    if (dims > cone.n) throw DomainError("grid dimension exceeds cone dimension");
    if (opt.mask && opt.mask->size() != f.size()) throw DomainError("mask size does not match grid");
    const double h = f.spacing();
    const auto& sh = f.shape();
    const int border = std::max(1, opt.border);
    GridAdmissibility rep;
    rep.worst_sigma = std::numeric_limits<double>::infinity();
    const Background bg = Background::flat(cone.n);
    for (std::size_t q = 0; q < f.size(); ++q) {
        const auto m = f.multi_index(q);
        bool interior = true;
        for (int a = 0; a < dims; ++a)
            if (m[a] < border || m[a] > sh[a] - 1 - border) interior = false;
        if (!interior) continue;
        if (opt.mask && !(*opt.mask)[q]) continue;

        auto val = [&](int da, int db, int dc) { return f.at(m[0] + da, m[1] + db, m[2] + dc); };
        auto shift = [](int axis, int s) {
            std::array<int, 3> o{0, 0, 0};
            o[axis] = s;
            return o;
        };
        ConformalJet jet;
        jet.gauge = gauge;
        jet.value = f.values()[q];
        jet.gradient.assign(std::size_t(cone.n), 0.0);
        jet.hessian = SymMatrix(cone.n);
        jet.background = bg;
        bool finite = std::isfinite(jet.value);
        for (int a = 0; a < dims && finite; ++a) {
            const auto p = shift(a, 1), mi = shift(a, -1);
            const double fp = val(p[0], p[1], p[2]), fm = val(mi[0], mi[1], mi[2]);
            jet.gradient[a] = (fp - fm) / (2.0 * h);
            jet.hessian(a, a) = (fp - 2.0 * jet.value + fm) / (h * h);
            for (int b = a + 1; b < dims; ++b) {
                auto o = [&](int sa, int sb) {
                    std::array<int, 3> d{0, 0, 0};
                    d[a] = sa;
                    d[b] = sb;
                    return val(d[0], d[1], d[2]);
                };
                jet.hessian.set_sym(a, b, (o(1, 1) - o(1, -1) - o(-1, 1) + o(-1, -1)) / (4.0 * h * h));
            }
            finite = std::isfinite(fp) && std::isfinite(fm);
        }
        ++rep.checked;
        bool pass = finite && (gauge == Gauge::W || jet.value > 0.0);
        double worst = -std::numeric_limits<double>::infinity();
        if (pass) {
            SymMatrix mat;
            switch (gauge) {
                case Gauge::W: mat = matrix_W(jet); break;
                case Gauge::U: mat = matrix_U(jet); break;
                case Gauge::V: mat = matrix_V(jet); break;
                case Gauge::Chi: mat = matrix_W(convert_gauge(jet, Gauge::W)); break;
            }
            const EigenTuple lam(symmetric_eigenvalues(mat));
            const auto e = sigma_all(lam.view(), cone.k);
            worst = *std::min_element(e.begin() + 1, e.end());
            pass = opt.strict ? in_gamma_k(lam, cone, opt.margin) : in_gamma_k_closure(lam, cone, opt.margin);
        }
        if (worst < rep.worst_sigma) {
            rep.worst_sigma = worst;
            rep.worst_node = q;
        }
        if (!pass) {
            ++rep.failed;
            rep.failed_nodes.push_back(q);
        }
    }
    return rep;
}

std::vector<bool> profile_admissibility(const RadialProfile& p, bool strict, double c_fd) {
    const auto ab = ab_reduce(p);
    const auto tol = profile_tolerance(p, c_fd);
    const double theta = p.cone.theta();
    p.cone.require_supercritical("profile admissibility");
    std::vector<bool> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double b = ab.b[i], s = ab.a[i] + theta * b;
        out[i] = strict ? (b > 0.0 && s > 0.0) : (b >= -tol[i] && s >= -tol[i]);
    }
    return out;
}

HarnackEstimate harnack_ratio(const GridField& chi, const ConeParams& cone, const HarnackOptions& opt) {
    HarnackEstimate est;
    est.exponent = cone.alpha();
    const double min_d = opt.min_distance > 0.0 ? opt.min_distance : 2.0 * chi.spacing();
    struct Node {
        Point x;
        double log_chi;
    };
    std::vector<Node> nodes;
    for (std::size_t q = 0; q < chi.size(); ++q) {
        const double c = chi.values()[q];
        if (!std::isfinite(c)) continue;
        if (!(c > 0.0)) throw DomainError("Harnack ratio needs chi > 0");
        nodes.push_back({chi.coord(q), std::log(c)});
    }
    if (opt.max_nodes > 0 && nodes.size() > opt.max_nodes) {
        const std::size_t stride = (nodes.size() + opt.max_nodes - 1) / opt.max_nodes;
        std::vector<Node> kept;
        for (std::size_t i = 0; i < nodes.size(); i += stride) kept.push_back(nodes[i]);
        nodes.swap(kept);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const double d = distance(nodes[i].x, nodes[j].x);
            if (d < min_d) continue;
            ++est.pairs;
            const double diff = nodes[i].log_chi - nodes[j].log_chi;
            const double v = std::abs(diff) / std::pow(d, est.exponent);
            if (v > est.c_est) {
                est.c_est = v;
                est.x = diff >= 0 ? nodes[i].x : nodes[j].x;
                est.y = diff >= 0 ? nodes[j].x : nodes[i].x;
            }
        }
    return est;
}

HarnackEstimate harnack_ratio(const RadialSample& chi, const ConeParams& cone, const HarnackOptions& opt) {
    if (chi.r.size() != chi.values.size() || chi.r.size() < 2)
        throw DomainError("radial chi sample needs >= 2 matching nodes");
    HarnackEstimate est;
    est.exponent = cone.alpha();
    double min_d = opt.min_distance;
    if (!(min_d > 0.0)) {
        double hmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < chi.r.size(); ++i) hmin = std::min(hmin, chi.r[i] - chi.r[i - 1]);
        min_d = 2.0 * hmin;
    }
    std::vector<double> lc(chi.values.size());
    for (std::size_t i = 0; i < lc.size(); ++i) {
        if (!(chi.values[i] > 0.0)) throw DomainError("Harnack ratio needs chi > 0");
        lc[i] = std::log(chi.values[i]);
    }
    for (std::size_t i = 0; i < lc.size(); ++i)
        for (std::size_t j = 0; j < lc.size(); ++j) {
            const double diff = lc[i] - lc[j];
            if (diff <= 0.0) continue;
            for (int side = 0; side < 2; ++side) {
                const double d = side == 0 ? std::abs(chi.r[i] - chi.r[j]) : chi.r[i] + chi.r[j];
                if (d < min_d) continue;
                ++est.pairs;
                const double v = diff / std::pow(d, est.exponent);
                if (v > est.c_est) {
                    est.c_est = v;
                    est.x = {chi.r[i], 0.0, 0.0};
                    est.y = {side == 0 ? chi.r[j] : -chi.r[j], 0.0, 0.0};
                }
            }
        }
    return est;
}

double unit_sphere_area(int n) {
    constexpr double pi = 3.14159265358979323846;
    return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

using boost::math::quadrature::gauss_kronrod;

double integrate(const std::function<double(double)>& g, double a, double b, double rel_tol) {
    if (b <= a) return 0.0;
    double err = 0.0;
    return gauss_kronrod<double, 31>::integrate(g, a, b, 20, rel_tol, &err);
}

struct RadialMetric {
    std::function<double(double)> w;
    int n;
    double rel_tol;

    double speed(double t) const { return std::exp(-w(t)); }
    double density(double t) const { return std::exp(-n * w(t)) * std::pow(t, n - 1); }
};

}  // namespace

VolumeCurve volume_ratio(const std::function<double(double)>& w_in, int n,
                         std::span<const double> geodesic_radii, VolumeCenter center, double rel_tol) {
    if (n < 2) throw DomainError("volume ratio needs n >= 2");
    std::function<double(double)> w = w_in;
    if (center == VolumeCenter::Infinity)
        w = [w_in](double r) { return w_in(1.0 / r) + 2.0 * std::log(r); };
    const RadialMetric metric{w, n, rel_tol};

    // e^{-w} must be integrable at the center: rho e^{-w(rho)} -> 0.
    const double g1 = 1e-8 * metric.speed(1e-8), g2 = 1e-10 * metric.speed(1e-10);
    if (!std::isfinite(g1) || !std::isfinite(g2) || g2 >= 0.5 * g1)
        throw DomainError("metric factor e^{-w} is not integrable at the center");

    VolumeCurve curve;
    curve.n = n;
    curve.omega_n = unit_sphere_area(n);
    std::vector<double> targets(geodesic_radii.begin(), geodesic_radii.end());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0.0)) throw DomainError("geodesic radii must be positive");
        if (i > 0 && !(targets[i] > targets[i - 1])) throw DomainError("geodesic radii must be increasing");
    }

    auto speed = [&](double t) { return metric.speed(t); };
    auto density = [&](double t) { return metric.density(t); };
    double rho_prev = 0.0, s_prev = 0.0, vol_prev = 0.0;
    for (double s_target : targets) {
        // Bracket rho with s(rho) >= s_target by doubling.
        double lo = rho_prev, s_lo = s_prev;
        double step = std::max(rho_prev, s_target * std::exp(w(std::max(rho_prev, 1e-300) + 1e-300)));
        if (!std::isfinite(step) || step <= 0.0) step = s_target;
        double hi = lo + step, s_hi = s_lo + integrate(speed, lo, hi, rel_tol);
        int guard = 0;
        while (s_hi < s_target) {
            lo = hi;
            s_lo = s_hi;
            hi = 2.0 * hi;
            s_hi = s_lo + integrate(speed, lo, hi, rel_tol);
            if (++guard > 200 || !std::isfinite(s_hi))
                throw DomainError("geodesic radius exceeds the extent of the metric");
        }
        const double base = s_lo, base_rho = lo;
        auto fn = [&](double rho) { return base + integrate(speed, base_rho, rho, rel_tol) - s_target; };
        boost::uintmax_t iters = 200;
        const auto bracket = boost::math::tools::toms748_solve(
            fn, lo, hi, s_lo - s_target, s_hi - s_target,
            boost::math::tools::eps_tolerance<double>(50), iters);
        const double rho = 0.5 * (bracket.first + bracket.second);
        const double vol = vol_prev + curve.omega_n * integrate(density, rho_prev, rho, rel_tol);
        curve.r.push_back(s_target);
        curve.rho.push_back(rho);
        curve.volume.push_back(vol);
        curve.Q.push_back(vol / std::pow(s_target, n));
        rho_prev = rho;
        s_prev = s_target;
        vol_prev = vol;
    }
    return curve;
}

double annulus_volume(const std::function<double(double)>& w, int n, double rho1, double rho2, double rel_tol) {
    if (!(rho1 > 0.0) || !(rho2 > rho1)) throw DomainError("annulus needs 0 < rho1 < rho2");
    const RadialMetric metric{w, n, rel_tol};
    return unit_sphere_area(n) * integrate([&](double t) { return metric.density(t); }, rho1, rho2, rel_tol);
}

double fit_quadratic_coefficient(const VolumeCurve& curve, double r_fit) {
    const double norm = curve.omega_n / curve.n;
    double s22 = 0, s24 = 0, s44 = 0, b2 = 0, b4 = 0;
    int used = 0;
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        const double r = curve.r[i];
        if (r > r_fit) continue;
        const double y = curve.Q[i] / norm - 1.0;
        const double x2 = r * r, x4 = x2 * x2;
        s22 += x2 * x2;
        s24 += x2 * x4;
        s44 += x4 * x4;
        b2 += x2 * y;
        b4 += x4 * y;
        ++used;
    }
    if (used < 2) throw DomainError("quadratic fit needs at least two samples below r_fit");
    const double det = s22 * s44 - s24 * s24;
    return (b2 * s44 - b4 * s24) / det;
}

double max_relative_increase(const VolumeCurve& curve) {
    double worst = 0.0;
    for (std::size_t i = 1; i < curve.Q.size(); ++i)
        worst = std::max(worst, curve.Q[i] / curve.Q[i - 1] - 1.0);
    return worst;
}

EndCount end_count_limit(const VolumeCurve& curve, double slope_tol) {
    if (curve.Q.size() < 2) throw DomainError("end count needs at least two samples");
    EndCount ec;
    const std::size_t last = curve.Q.size() - 1;
    ec.m_real = curve.n * curve.Q[last] / curve.omega_n;
    ec.m = int(std::lround(ec.m_real));
    ec.residual = std::abs(ec.m_real - ec.m);
    ec.tail_slope = std::log(curve.Q[last] / curve.Q[last - 1]) / std::log(curve.r[last] / curve.r[last - 1]);
    ec.conclusive = std::abs(ec.tail_slope) <= slope_tol;
    return ec;
}

}  // namespace ksigma
