#include "ksigma/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ksigma/error.hpp"

namespace ksigma {

EigenTuple::EigenTuple(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("EigenTuple needs at least two entries");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("EigenTuple entries must be finite");
}

EigenTuple::EigenTuple(std::initializer_list<double> values)
    : EigenTuple(std::vector<double>(values)) {}

double EigenTuple::sum() const noexcept {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

EigenTuple EigenTuple::scaled(double c) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= c;
    return EigenTuple(std::move(out));
}

ConeParams::ConeParams(int n_, int k_) : n(n_), k(k_) {
    if (n < 3) throw DomainError("cone dimension n must be >= 3");
    if (k < 1 || k > n) throw DomainError("cone order k must satisfy 1 <= k <= n");
}

double ConeParams::delta_gv() const {
    if (k < 2) throw DomainError("delta = (n-k)/(n(k-1)) requires k >= 2");
    return double(n - k) / (double(n) * double(k - 1));
}

void ConeParams::require_supercritical(const char* what) const {
    if (!supercritical())
        throw UnsupportedRegime(std::string(what) + " requires k > n/2 (got n=" +
                                std::to_string(n) + ", k=" + std::to_string(k) + ")");
}

SymMatrix::SymMatrix(int n) : n_(n), a_(std::size_t(n) * n, 0.0) {
    if (n < 1 || n > max_dim) throw DomainError("SymMatrix dimension must be in [1, 16]");
}

SymMatrix SymMatrix::identity(int n) {
    SymMatrix s(n);
    for (int i = 0; i < n; ++i) s(i, i) = 1.0;
    return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
    SymMatrix s(int(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) s(int(i), int(i)) = d[i];
    return s;
}

void SymMatrix::set_sym(int i, int j, double v) {
    (*this)(i, j) = v;
    (*this)(j, i) = v;
}

bool SymMatrix::is_symmetric(double rel_tol) const {
    const double scale = std::max(1.0, max_abs());
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
    return true;
}

bool SymMatrix::is_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

SymMatrix SymMatrix::without(std::span<const int> drop) const {
    std::vector<int> keep;
    for (int i = 0; i < n_; ++i)
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) keep.push_back(i);
    if (keep.empty()) return SymMatrix();
    SymMatrix out(int(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            out(int(i), int(j)) = (*this)(keep[i], keep[j]);
    return out;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    if (o.n_ != n_) throw DomainError("SymMatrix dimension mismatch");
    SymMatrix out(*this);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += o.a_[i];
    return out;
}

SymMatrix SymMatrix::operator*(double c) const {
    SymMatrix out(*this);
    for (double& v : out.a_) v *= c;
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return std::round(r);
}

std::vector<double> sigma_all(std::span<const double> lambda, int kmax) {
    const int n = int(lambda.size());
    if (kmax < 0 || kmax > n) throw DomainError("sigma order out of range [0, n]");
    // e_j(l_1..l_m) = e_j(l_1..l_{m-1}) + l_m e_{j-1}(l_1..l_{m-1}); descending j keeps it in place.
    std::vector<double> e(std::size_t(kmax) + 1, 0.0);
    e[0] = 1.0;
    for (int m = 0; m < n; ++m) {
        const int top = std::min(kmax, m + 1);
        for (int j = top; j >= 1; --j) e[j] += lambda[m] * e[j - 1];
    }
    return e;
}

double sigma(std::span<const double> lambda, int j) {
    if (j < 0 || j > int(lambda.size())) throw DomainError("sigma order out of range [0, n]");
    return sigma_all(lambda, j)[j];
}

double sigma(const EigenTuple& lambda, int j) { return sigma(lambda.view(), j); }

std::vector<double> sigma_gradient(const EigenTuple& lambda, int k) {
    const int n = int(lambda.size());
    if (k < 1 || k > n) throw DomainError("sigma_gradient order out of range [1, n]");
    std::vector<double> grad(lambda.size());
    std::vector<double> rest;
    rest.reserve(lambda.size() - 1);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        rest.clear();
        for (std::size_t j = 0; j < lambda.size(); ++j)
            if (j != i) rest.push_back(lambda[j]);
        grad[i] = sigma_all(rest, k - 1)[k - 1];
    }
    return grad;
}

namespace {

void check_cone_dim(const EigenTuple& lambda, const ConeParams& cone) {
    if (int(lambda.size()) != cone.n)
        throw DomainError("eigen tuple length does not match cone dimension");
}

}  // namespace

bool in_gamma_k(const EigenTuple& lambda, const ConeParams& cone, double margin) {
    check_cone_dim(lambda, cone);
    const auto e = sigma_all(lambda.view(), cone.k);
    for (int j = 1; j <= cone.k; ++j)
        if (!(e[j] > margin)) return false;
    return true;
}

bool in_gamma_k_closure(const EigenTuple& lambda, const ConeParams& cone, double margin) {
    check_cone_dim(lambda, cone);
    const auto e = sigma_all(lambda.view(), cone.k);
    for (int j = 1; j <= cone.k; ++j)
        if (!(e[j] >= -margin)) return false;
    return true;
}

bool in_sigma_delta(const EigenTuple& lambda, double delta) {
    if (delta < 0.0) throw DomainError("Sigma_delta requires delta >= 0");
    const double bound = -delta * lambda.sum();
    for (double l : lambda.values())
        if (!(l > bound)) return false;
    return true;
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& s) {
    const int n = s.dim();
    if (n == 0) return {};
    if (!s.is_finite()) throw DomainError("matrix has non-finite entries");
    SymMatrix a(s);
    double off = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            total += a(i, j) * a(i, j);
            if (i != j) off += a(i, j) * a(i, j);
        }
    const double stop = 1e-32 * std::max(total, 1e-300);
    for (int sweep = 0; sweep < 100 && off > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (int r = 0; r < n; ++r) {
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - sn * arq;
                    a(r, q) = sn * arp + c * arq;
                }
                for (int r = 0; r < n; ++r) {
                    const double apr = a(p, r), aqr = a(q, r);
                    a(p, r) = c * apr - sn * aqr;
                    a(q, r) = sn * apr + c * aqr;
                }
                a(p, q) = a(q, p) = 0.0;
            }
        }
        off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) off += a(i, j) * a(i, j);
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double sigma_of_matrix(const SymMatrix& s, int k) {
    if (!s.is_symmetric()) throw DomainError("sigma_of_matrix: matrix is not symmetric");
    if (k < 0 || k > s.dim()) throw DomainError("sigma order out of range [0, n]");
    if (k == 0) return 1.0;
    const auto eig = symmetric_eigenvalues(s);
    return sigma(eig, k);
}

double bordered_minor_identity_check(const SymMatrix& s, int k) {
    const int n = s.dim();
    if (n < 2) throw DomainError("arrow matrix needs n >= 2");
    if (!s.is_symmetric()) throw DomainError("arrow matrix must be symmetric");
    if (k < 1 || k > n) throw DomainError("sigma order out of range [1, n]");
    const double scale = std::max(1.0, s.max_abs());
    for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j)
            if (i != j && std::abs(s(i, j)) > 1e-14 * scale)
                throw DomainError("matrix is not an arrow matrix (off-diagonal entry outside last row/column)");

    std::vector<double> diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) diag[i] = s(i, i);
    const double lhs = sigma_of_matrix(s, k);
    double rhs = sigma(diag, k);
    if (k >= 2) {
        std::vector<double> rest;
        for (int i = 0; i < n - 1; ++i) {
            rest.clear();
            for (int j = 0; j < n - 1; ++j)
                if (j != i) rest.push_back(diag[j]);
            const double s_k2 = (k - 2 <= int(rest.size())) ? sigma_all(rest, k - 2)[k - 2] : 0.0;
            rhs -= s_k2 * s(i, n - 1) * s(i, n - 1);
        }
    }
    return std::abs(lhs - rhs);
}

}  // namespace ksigma
