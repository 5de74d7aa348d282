#include "ksigma/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ksigma/error.hpp"

namespace ksigma {

void RadialProfile::validate() const {
    const std::size_t m = r.size();
    if (w.size() != m || dw.size() != m || d2w.size() != m)
        throw DomainError("radial profile columns have different lengths");
    if (m < 3) throw DomainError("radial profile needs at least 3 nodes");
    if (!(r[0] > 0.0)) throw DomainError("radial profile grid must start at r > 0");
    for (std::size_t i = 1; i < m; ++i)
        if (!(r[i] > r[i - 1])) throw DomainError("radial profile grid must be strictly increasing");
    for (std::size_t i = 0; i < m; ++i)
        if (!std::isfinite(w[i]) || !std::isfinite(dw[i]) || !std::isfinite(d2w[i]))
            throw DomainError("radial profile has non-finite samples");
}

RadialProfile RadialProfile::from_function(std::vector<double> r, const ConeParams& cone,
                                           const std::function<double(double)>& w,
                                           const std::function<double(double)>& dw,
                                           const std::function<double(double)>& d2w) {
    RadialProfile p;
    p.cone = cone;
    p.analytic = true;
    p.r = std::move(r);
    for (double x : p.r) {
        p.w.push_back(w(x));
        p.dw.push_back(dw(x));
        p.d2w.push_back(d2w(x));
    }
    p.validate();
    return p;
}

RadialProfile RadialProfile::from_samples(std::vector<double> r, std::vector<double> w,
                                          const ConeParams& cone) {
    if (r.size() != w.size()) throw DomainError("radial profile columns have different lengths");
    if (r.size() < 3) throw DomainError("finite-difference mode needs at least 3 nodes");
    RadialProfile p;
    p.cone = cone;
    p.analytic = false;
    p.r = std::move(r);
    p.w = std::move(w);
    finite_difference_derivatives(p.r, p.w, p.dw, p.d2w);
    p.validate();
    return p;
}

std::vector<double> geometric_grid(double r_max, double q, int count) {
    if (!(r_max > 0.0) || !(q > 0.0 && q < 1.0) || count < 3)
        throw DomainError("geometric grid needs r_max > 0, 0 < q < 1, count >= 3");
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) r[std::size_t(count - 1 - i)] = r_max * std::pow(q, i);
    return r;
}

std::vector<double> uniform_grid(double r0, double r1, int intervals) {
    if (!(r1 > r0) || intervals < 1) throw DomainError("uniform grid needs r1 > r0 and N >= 1");
    std::vector<double> r(std::size_t(intervals) + 1);
    const double h = (r1 - r0) / intervals;
    for (int i = 0; i <= intervals; ++i) r[std::size_t(i)] = r0 + i * h;
    r.back() = r1;
    return r;
}

void finite_difference_derivatives(const std::vector<double>& r, const std::vector<double>& w,
                                   std::vector<double>& dw, std::vector<double>& d2w) {
    const std::size_t m = r.size();
    if (m < 3 || w.size() != m) throw DomainError("finite differences need >= 3 matching nodes");
    dw.assign(m, 0.0);
    d2w.assign(m, 0.0);
    // Derivatives of the quadratic through (x0,x1,x2) evaluated at x.
    auto quad = [](double x0, double x1, double x2, double y0, double y1, double y2, double x,
                   double& d1, double& d2) {
        const double l0 = 1.0 / ((x0 - x1) * (x0 - x2));
        const double l1 = 1.0 / ((x1 - x0) * (x1 - x2));
        const double l2 = 1.0 / ((x2 - x0) * (x2 - x1));
        d1 = y0 * l0 * ((x - x1) + (x - x2)) + y1 * l1 * ((x - x0) + (x - x2)) +
             y2 * l2 * ((x - x0) + (x - x1));
        d2 = 2.0 * (y0 * l0 + y1 * l1 + y2 * l2);
    };
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t c = std::clamp<std::size_t>(i, 1, m - 2);
        quad(r[c - 1], r[c], r[c + 1], w[c - 1], w[c], w[c + 1], r[i], dw[i], d2w[i]);
    }
}

RadialAB ab_reduce(const RadialProfile& p) {
    RadialAB ab;
    ab.a.resize(p.size());
    ab.b.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d1 = p.dw[i];
        ab.a[i] = p.d2w[i] + 0.5 * d1 * d1;
        ab.b[i] = d1 / p.r[i] - 0.5 * d1 * d1;
    }
    return ab;
}

double sigma_k_radial(double a, double b, const ConeParams& cone) {
    const int n = cone.n, k = cone.k;
    return binomial(n - 1, k) * std::pow(b, k) + binomial(n - 1, k - 1) * a * std::pow(b, k - 1);
}

std::vector<double> sigma_k_radial(const RadialAB& ab, const ConeParams& cone) {
    if (ab.a.size() != ab.b.size()) throw DomainError("RadialAB columns have different lengths");
    std::vector<double> out(ab.a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma_k_radial(ab.a[i], ab.b[i], cone);
    return out;
}

void sigma_k_radial_partials(double a, double b, const ConeParams& cone, double& d_a, double& d_b) {
    const int n = cone.n, k = cone.k;
    const double c1 = binomial(n - 1, k), c2 = binomial(n - 1, k - 1);
    d_a = c2 * std::pow(b, k - 1);
    d_b = c1 * k * std::pow(b, k - 1) + (k >= 2 ? c2 * a * (k - 1) * std::pow(b, k - 2) : 0.0);
}

std::vector<bool> radial_admissible(const RadialAB& ab, const ConeParams& cone, bool strict,
                                    double tol) {
    cone.require_supercritical("radial two-inequality cone test");
    const double theta = cone.theta();
    std::vector<bool> out(ab.a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double b = ab.b[i];
        const double s = ab.a[i] + theta * b;
        out[i] = strict ? (b > tol && s > tol) : (b >= -tol && s >= -tol);
    }
    return out;
}

std::vector<double> profile_tolerance(const RadialProfile& p, double c_fd) {
    std::vector<double> tol(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double scale =
            std::abs(p.d2w[i]) + p.dw[i] * p.dw[i] + std::abs(p.dw[i]) / p.r[i] + 1e-300;
        if (p.analytic) {
            tol[i] = 1e-10 * scale;
        } else {
            double h = 0.0;
            if (i > 0) h = std::max(h, p.r[i] - p.r[i - 1]);
            if (i + 1 < p.size()) h = std::max(h, p.r[i + 1] - p.r[i]);
            const double rel = h / p.r[i];
            tol[i] = c_fd * rel * rel * scale;
        }
    }
    return tol;
}

RwMonotoneReport check_rw_monotone(const RadialProfile& p, double tol) {
    p.validate();
    RwMonotoneReport rep;
    rep.min_rw = std::numeric_limits<double>::infinity();
    rep.max_rw = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double rw = p.r[i] * p.dw[i];
        rep.min_rw = std::min(rep.min_rw, rw);
        rep.max_rw = std::max(rep.max_rw, rw);
        const double excess = std::max({0.0, rw - 2.0, -rw});
        if (excess > rep.worst_excess) rep.worst_excess = excess;
        if (excess > worst) {
            worst = excess;
            rep.worst_node = i;
        }
        if (i > 0) {
            const double drop = p.r[i - 1] * p.dw[i - 1] - rw;
            if (drop > rep.worst_decrease) rep.worst_decrease = drop;
            if (drop > worst) {
                worst = drop;
                rep.worst_node = i;
            }
        }
    }
    rep.ok = rep.worst_excess <= tol && rep.worst_decrease <= tol;
    return rep;
}

const char* to_string(SingularityClass c) {
    return c == SingularityClass::Fundamental ? "FUNDAMENTAL" : "HOLDER";
}

SingularityReport classify_singularity(const RadialProfile& p, const ClassifyOptions& opt) {
    p.validate();
    p.cone.require_supercritical("singularity classification");
    const RadialAB ab = ab_reduce(p);
    const auto tol = profile_tolerance(p, opt.c_fd);
    const double theta = p.cone.theta();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double b = ab.b[i], s = ab.a[i] + theta * b;
        if (b < -tol[i] || s < -tol[i]) {
            std::ostringstream msg;
            msg << "profile is not k-admissible at r=" << p.r[i] << ": b=" << b
                << ", a+theta*b=" << s << " (tolerance " << tol[i] << ")";
            throw DomainError(msg.str());
        }
    }

    SingularityReport rep;
    // Aitken extrapolation of r w' over the three smallest radii; exact for
    // L + K q^{i alpha} on geometric grids.
    const double x0 = p.r[2] * p.dw[2], x1 = p.r[1] * p.dw[1], x2 = p.r[0] * p.dw[0];
    const double d1 = x1 - x0, d2 = x2 - x1;
    const double den = d2 - d1;
    const double scale = std::max({std::abs(x0), std::abs(x1), std::abs(x2), 1e-300});
    if (std::abs(den) <= 1e-12 * scale || d1 * d2 <= 0.0)
        rep.rw_limit = x2;
    else
        rep.rw_limit = x2 - d2 * d2 / den;

    if (rep.rw_limit >= 2.0 - opt.eps_class) {
        rep.kind = SingularityClass::Fundamental;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double c = p.w[i] - 2.0 * std::log(p.r[i]);
            sum += c;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        rep.offset = sum / 3.0;
        rep.offset_spread = hi - lo;
        rep.alpha_est = 0.0;
        return rep;
    }

    rep.kind = SingularityClass::Holder;
    const std::size_t half = std::max<std::size_t>(3, p.size() / 2);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(half, p.size()); ++i) {
        if (p.dw[i] > 1e-300 && std::isfinite(std::log(p.dw[i]))) {
            lx.push_back(std::log(p.r[i]));
            ly.push_back(std::log(p.dw[i]));
        }
    }
    rep.fit_nodes = int(lx.size());
    if (lx.size() < 2) {
        rep.alpha_est = 1.0;
        rep.alpha_saturated = true;
        return rep;
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (my + slope * (lx[i] - mx));
        rss += e * e;
    }
    rep.fitted_slope = slope;
    rep.fit_rms = std::sqrt(rss / lx.size());
    // w' ~ C r^{-theta} integrates to a Hoelder exponent 1 - theta.
    const double alpha = 1.0 + slope;
    if (alpha >= 1.0) {
        rep.alpha_est = 1.0;
        rep.alpha_saturated = true;
    } else {
        rep.alpha_est = alpha;
    }
    return rep;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double finite_max(double a, double b) {
    if (!std::isfinite(b)) return a;
    return std::max(a, b);
}

// Maximum of the interpolated field over the circle/sphere |x - c| = r.
double sphere_max(const GridField& f, const Point& c, double r, int samples) {
    if (r <= 0.0) return f.interpolate(c);
    const double ninf = -std::numeric_limits<double>::infinity();
    if (f.dims() == 2) {
        const int m = samples > 0 ? samples : std::max(64, int(std::ceil(16.0 * kPi * r / f.spacing())));
        auto eval = [&](double phi) {
            return f.interpolate({c[0] + r * std::cos(phi), c[1] + r * std::sin(phi), 0.0});
        };
        std::vector<std::pair<double, double>> cand;
        for (int i = 0; i < m; ++i) {
            const double phi = 2.0 * kPi * i / m;
            cand.emplace_back(eval(phi), phi);
        }
        std::partial_sort(cand.begin(), cand.begin() + std::min<std::size_t>(3, cand.size()), cand.end(),
                          [](auto& x, auto& y) { return x.first > y.first; });
        double best = ninf;
        for (std::size_t t = 0; t < std::min<std::size_t>(3, cand.size()); ++t) {
            double phi = cand[t].second, val = cand[t].first;
            double step = 2.0 * kPi / m;
            while (step > 1e-12) {
                const double a = eval(phi + step), b = eval(phi - step);
                if (a > val && a >= b) {
                    phi += step;
                    val = a;
                } else if (b > val) {
                    phi -= step;
                    val = b;
                } else {
                    step *= 0.5;
                }
            }
            best = finite_max(best, val);
        }
        return best;
    }
    const double ratio = r / f.spacing();
    const int m = samples > 0 ? samples : std::max(256, int(std::ceil(16.0 * kPi * ratio * ratio)));
    auto eval = [&](const Point& d) {
        return f.interpolate({c[0] + r * d[0], c[1] + r * d[1], c[2] + r * d[2]});
    };
    auto normalize = [](Point d) {
        const double s = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        return Point{d[0] / s, d[1] / s, d[2] / s};
    };
    std::vector<std::pair<double, Point>> cand;
    cand.reserve(std::size_t(m));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / m;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        const Point d{rho * std::cos(phi), rho * std::sin(phi), z};
        cand.emplace_back(eval(d), d);
    }
    const std::size_t top = std::min<std::size_t>(4, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + top, cand.end(),
                      [](auto& x, auto& y) { return x.first > y.first; });
    double best = ninf;
    for (std::size_t t = 0; t < top; ++t) {
        Point d = cand[t].second;
        double val = cand[t].first;
        double step = 2.0 * std::sqrt(4.0 * kPi / m);
        while (step > 1e-11) {
            // Orthonormal tangent frame at d.
            const Point ref = std::abs(d[2]) < 0.9 ? Point{0, 0, 1} : Point{1, 0, 0};
            Point e1{ref[1] * d[2] - ref[2] * d[1], ref[2] * d[0] - ref[0] * d[2],
                     ref[0] * d[1] - ref[1] * d[0]};
            e1 = normalize(e1);
            const Point e2{d[1] * e1[2] - d[2] * e1[1], d[2] * e1[0] - d[0] * e1[2],
                           d[0] * e1[1] - d[1] * e1[0]};
            bool moved = false;
            for (const auto& dir : {e1, e2}) {
                for (double sgn : {1.0, -1.0}) {
                    const Point trial = normalize({d[0] + sgn * step * dir[0], d[1] + sgn * step * dir[1],
                                                   d[2] + sgn * step * dir[2]});
                    const double v = eval(trial);
                    if (v > val) {
                        val = v;
                        d = trial;
                        moved = true;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
        best = finite_max(best, val);
    }
    return best;
}

}  // namespace

EnvelopeProfile radial_envelope(const GridField& f, const Point& center, const EnvelopeOptions& opt) {
    const double reach = f.distance_to_boundary(center);
    if (!(reach > 0.0)) throw DomainError("envelope center must lie strictly inside the grid box");
    const double r_max = opt.r_max > 0.0 ? opt.r_max : reach;
    if (r_max > reach * (1.0 + 1e-12))
        throw DomainError("envelope radius exceeds the distance from center to the box boundary");
    const double dr = opt.dr > 0.0 ? opt.dr : f.spacing();
    if (opt.r_start < 0.0 || opt.r_start > r_max) throw DomainError("envelope start radius out of range");

    // Node values sorted by distance give the exact sup over sampled points.
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t q = 0; q < f.size(); ++q) {
        const double d = distance(f.coord(q), center);
        if (d <= r_max * (1.0 + 1e-12)) nodes.emplace_back(d, f.values()[q]);
    }
    std::sort(nodes.begin(), nodes.end());

    EnvelopeProfile e;
    e.center = center;
    e.provenance = "ball-sup envelope";
    double running = -std::numeric_limits<double>::infinity();
    std::size_t next_node = 0;
    const int steps = int(std::floor((r_max - opt.r_start) / dr + 1e-9));
    for (int j = 0; j <= steps; ++j) {
        const double r = std::min(opt.r_start + j * dr, r_max);
        while (next_node < nodes.size() && nodes[next_node].first <= r * (1.0 + 1e-12)) {
            running = finite_max(running, nodes[next_node].second);
            ++next_node;
        }
        running = finite_max(running, sphere_max(f, center, r, opt.sphere_samples));
        e.r.push_back(r);
        e.wtilde.push_back(running);
    }
    return e;
}

EnvelopeCheckReport envelope_viscosity_check(const EnvelopeProfile& e, const ConeParams& cone,
                                             double tau) {
    cone.require_supercritical("envelope admissibility check");
    if (e.r.size() != e.wtilde.size() || e.r.size() < 3)
        throw DomainError("envelope needs at least 3 matching samples");
    EnvelopeCheckReport rep;
    rep.tau = tau;
    rep.min_b = std::numeric_limits<double>::infinity();
    rep.min_ab = std::numeric_limits<double>::infinity();
    const double one_minus_theta = 1.0 - cone.theta();
    for (std::size_t i = 1; i + 1 < e.r.size(); ++i) {
        if (!(e.r[i - 1] > 0.0)) continue;
        const double y0 = e.wtilde[i - 1], y1 = e.wtilde[i], y2 = e.wtilde[i + 1];
        if (!std::isfinite(y0) || !std::isfinite(y1) || !std::isfinite(y2)) continue;
        const double h1 = e.r[i] - e.r[i - 1], h2 = e.r[i + 1] - e.r[i];
        const double d1 = (-h2 / (h1 * (h1 + h2))) * y0 + ((h2 - h1) / (h1 * h2)) * y1 +
                          (h1 / (h2 * (h1 + h2))) * y2;
        const double d2 = 2.0 * (y0 / (h1 * (h1 + h2)) - y1 / (h1 * h2) + y2 / (h2 * (h1 + h2)));
        const double r = e.r[i];
        const double b = d1 / r - 0.5 * d1 * d1;
        const double s = (d2 + d1 / r) - one_minus_theta * b;
        rep.min_b = std::min(rep.min_b, b);
        rep.min_ab = std::min(rep.min_ab, s);
        if (b < -tau) rep.violations.push_back({r, 1, b});
        if (s < -tau) rep.violations.push_back({r, 2, s});
    }
    return rep;
}

}  // namespace ksigma
