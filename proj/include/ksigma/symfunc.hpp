#pragma once

// Elementary symmetric polynomials, Garding cones and principal-minor
// identities for small symmetric matrices.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ksigma {

/// Real eigenvalue vector (lambda_1..lambda_n), n >= 2, all entries finite.
class EigenTuple {
public:
    EigenTuple() = default;
    explicit EigenTuple(std::vector<double> values);
    EigenTuple(std::initializer_list<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> view() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double sum() const noexcept;
    EigenTuple scaled(double c) const;

private:
    std::vector<double> values_;
};

/// Dimension n >= 3 and order 1 <= k <= n together with the derived
/// exponents used throughout the library.
struct ConeParams {
    int n = 3;
    int k = 2;

    ConeParams() = default;
    ConeParams(int n_, int k_);

    /// (n-k)/k
    double theta() const noexcept { return double(n - k) / double(k); }
    /// 2 - n/k, the sharp Hoelder exponent.
    double alpha() const noexcept { return 2.0 - double(n) / double(k); }
    /// (n-k)/(n(k-1)); Gamma_k embeds in Sigma_delta with this delta (k >= 2).
    double delta_gv() const;

    bool supercritical() const noexcept { return 2 * k > n; }
    /// Throws UnsupportedRegime unless k > n/2.
    void require_supercritical(const char* what) const;
};

/// Dense symmetric n x n matrix, n <= 16.
class SymMatrix {
public:
    static constexpr int max_dim = 16;

    SymMatrix() = default;
    explicit SymMatrix(int n);  // zero matrix

    static SymMatrix identity(int n);
    static SymMatrix diagonal(std::span<const double> d);

    int dim() const noexcept { return n_; }
    double& operator()(int i, int j) { return a_[std::size_t(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[std::size_t(i) * n_ + j]; }

    /// Sets (i,j) and (j,i).
    void set_sym(int i, int j, double v);

    bool is_symmetric(double rel_tol = 1e-12) const;
    bool is_finite() const;
    double max_abs() const;
    /// Removes rows and columns listed in `drop`.
    SymMatrix without(std::span<const int> drop) const;

    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix operator*(double c) const;

private:
    int n_ = 0;
    std::vector<double> a_;
};

double binomial(int n, int k);

/// sigma_j(lambda); sigma_0 = 1. Throws DomainError for j outside [0, n].
double sigma(std::span<const double> lambda, int j);
double sigma(const EigenTuple& lambda, int j);

/// (sigma_0, ..., sigma_kmax) in one pass of the recurrence.
std::vector<double> sigma_all(std::span<const double> lambda, int kmax);

/// d sigma_k / d lambda_i = sigma_{k-1}(lambda with entry i removed).
std::vector<double> sigma_gradient(const EigenTuple& lambda, int k);

/// Open cone: sigma_j(lambda) > margin for j = 1..k.
bool in_gamma_k(const EigenTuple& lambda, const ConeParams& cone, double margin = 0.0);
/// Closed cone: sigma_j(lambda) >= -margin for j = 1..k.
bool in_gamma_k_closure(const EigenTuple& lambda, const ConeParams& cone, double margin = 0.0);

/// lambda_i > -delta * sum_j lambda_j for every i.
bool in_sigma_delta(const EigenTuple& lambda, double delta);

/// Eigenvalues (ascending) by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(const SymMatrix& s);

/// sigma_k of the eigenvalues of S. Throws DomainError if S is not symmetric.
double sigma_of_matrix(const SymMatrix& s, int k);

/// |sigma_k(S) - [sigma_k(diag S) - sum_{i<n} sigma_{k-2}(S_{|in}) s_{in}^2]|
/// for an arrow matrix S (diagonal except the last row/column).
double bordered_minor_identity_check(const SymMatrix& s, int k);

}  // namespace ksigma
