#pragma once

// Independent reference computations used only by the tests: brute-force
// enumeration, elimination determinants, finite differences, bisection.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ksigma/conformal.hpp"
#include "ksigma/symfunc.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Sum over j-subsets of products, by bitmask enumeration.
inline double sigma_enum(const std::vector<double>& lam, int j) {
    const int n = int(lam.size());
    if (j == 0) return 1.0;
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != j) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= lam[i];
        s += prod;
    }
    return s;
}

/// Sum of absolute values of the subset products (scale for relative tolerances).
inline double sigma_enum_abs(const std::vector<double>& lam, int j) {
    std::vector<double> a(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) a[i] = std::abs(lam[i]);
    return sigma_enum(a, j);
}

inline double det(Matrix a) {
    const std::size_t n = a.size();
    double d = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t q = c; q < n; ++q) a[r][q] -= f * a[c][q];
        }
    }
    return d;
}

inline Matrix to_matrix(const ksigma::SymMatrix& s) {
    Matrix m(std::size_t(s.dim()), std::vector<double>(std::size_t(s.dim())));
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) m[i][j] = s(i, j);
    return m;
}

/// Sum of all principal k x k minors.
inline double principal_minor_sum(const Matrix& s, int k) {
    const int n = int(s.size());
    if (k == 0) return 1.0;
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        Matrix sub(idx.size(), std::vector<double>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) sub[a][b] = s[idx[a]][idx[b]];
        total += det(sub);
    }
    return total;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Random symmetric matrix with entries in [-1, 1].
inline ksigma::SymMatrix random_sym(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ksigma::SymMatrix s(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) s.set_sym(i, j, u(rng));
    return s;
}

/// Random w-gauge jet on the given background.
inline ksigma::ConformalJet random_w_jet(int n, std::mt19937_64& rng, const ksigma::Background& bg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ksigma::ConformalJet j;
    j.gauge = ksigma::Gauge::W;
    j.value = u(rng);
    j.gradient.resize(std::size_t(n));
    for (auto& g : j.gradient) g = u(rng);
    j.hessian = random_sym(n, rng);
    j.background = bg;
    return j;
}

/// Hand chain rule: jet of e^{c w} from a w-jet.
inline ksigma::ConformalJet exp_jet(const ksigma::ConformalJet& w, double c, ksigma::Gauge target) {
    const int n = w.dim();
    ksigma::ConformalJet out;
    out.gauge = target;
    out.value = std::exp(c * w.value);
    out.gradient.resize(std::size_t(n));
    out.hessian = ksigma::SymMatrix(n);
    out.background = w.background;
    for (int i = 0; i < n; ++i) out.gradient[i] = c * out.value * w.gradient[i];
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            out.hessian.set_sym(
                i, j, out.value * (c * w.hessian(i, j) + c * c * w.gradient[i] * w.gradient[j]));
    return out;
}

}  // namespace oracle
