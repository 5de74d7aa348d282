#include <doctest.h>

#include <cmath>
#include <random>

#include "ksigma/conformal.hpp"
#include "ksigma/error.hpp"
#include "oracles.hpp"

using namespace ksigma;

namespace {

double max_entry_diff(const SymMatrix& a, const SymMatrix& b) {
    double d = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

ConformalJet zero_jet(int n, Gauge g, double value, const Background& bg) {
    ConformalJet j;
    j.gauge = g;
    j.value = value;
    j.gradient.assign(static_cast<std::size_t>(n), 0.0);
    j.hessian = SymMatrix(n);
    j.background = bg;
    return j;
}

// w = c log r at x, flat, in n dimensions.
ConformalJet log_jet(int n, double c, const std::vector<double>& x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    ConformalJet j = zero_jet(n, Gauge::W, 0.5 * c * std::log(r2), Background::flat(n));
    for (int i = 0; i < n; ++i) {
        j.gradient[i] = c * x[i] / r2;
        for (int l = i; l < n; ++l)
            j.hessian.set_sym(i, l, c * ((i == l ? 1.0 : 0.0) / r2 - 2.0 * x[i] * x[l] / (r2 * r2)));
    }
    return j;
}

}  // namespace

TEST_CASE("identity point converts trivially") {
    const ConformalJet w = zero_jet(4, Gauge::W, 0.0, Background::flat(4));
    const ConformalJet u = convert_gauge(w, Gauge::U);
    CHECK(u.value == doctest::Approx(1.0));
    for (double g : u.gradient) CHECK(g == 0.0);
    CHECK(u.hessian.max_abs() == 0.0);
}

TEST_CASE("fundamental solution in v-gauge is 2 log r in w-gauge") {
    const int n = 3;
    const std::vector<double> x{0.3, -0.4, 1.2};
    const double r = std::sqrt(0.09 + 0.16 + 1.44);
    // v = r^{2-n}, computed by hand
    ConformalJet v = zero_jet(n, Gauge::V, std::pow(r, 2 - n), Background::flat(n));
    for (int i = 0; i < n; ++i) {
        v.gradient[i] = (2 - n) * std::pow(r, -n) * x[i];
        for (int l = i; l < n; ++l)
            v.hessian.set_sym(i, l, (2 - n) * std::pow(r, -n) * ((i == l) - n * x[i] * x[l] / (r * r)));
    }
    const ConformalJet w = convert_gauge(v, Gauge::W);
    const ConformalJet ref = log_jet(n, 2.0, x);
    CHECK(w.value == doctest::Approx(ref.value));
    for (int i = 0; i < n; ++i) CHECK(w.gradient[i] == doctest::Approx(ref.gradient[i]));
    CHECK(max_entry_diff(w.hessian, ref.hessian) < 1e-12);
    CHECK(conformal_laplacian_residual(v) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("gauge round trips and composition") {
    std::mt19937_64 rng(17);
    const Gauge all[] = {Gauge::Chi, Gauge::V, Gauge::U, Gauge::W};
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + trial % 4;
        const ConformalJet w = oracle::random_w_jet(n, rng, Background::flat(n));
        for (Gauge a : all) {
            const ConformalJet ja = convert_gauge(w, a);
            for (Gauge b : all) {
                const ConformalJet direct = convert_gauge(w, b);
                const ConformalJet via = convert_gauge(ja, b);
                REQUIRE(via.value == doctest::Approx(direct.value).epsilon(1e-12));
                REQUIRE(max_entry_diff(via.hessian, direct.hessian) <= 1e-11 * std::max(1.0, direct.hessian.max_abs()));
            }
            const ConformalJet back = convert_gauge(ja, Gauge::W);
            REQUIRE(back.value == doctest::Approx(w.value).epsilon(1e-12).scale(1.0));
            REQUIRE(max_entry_diff(back.hessian, w.hessian) <= 1e-12 * std::max(1.0, w.hessian.max_abs()));
        }
    }
}

TEST_CASE("convert_gauge rejects non-positive values") {
    ConformalJet v = zero_jet(3, Gauge::V, -1.0, Background::flat(3));
    CHECK_THROWS_AS(convert_gauge(v, Gauge::W), DomainError);
    ConformalJet u = zero_jet(3, Gauge::U, 0.0, Background::flat(3));
    CHECK_THROWS_AS(matrix_U(u), DomainError);
}

TEST_CASE("matrices on simple states") {
    CHECK(matrix_W(zero_jet(3, Gauge::W, 2.5, Background::flat(3))).max_abs() == 0.0);
    CHECK(matrix_U(zero_jet(3, Gauge::U, 1.0, Background::flat(3))).max_abs() == 0.0);
    CHECK(matrix_V(zero_jet(3, Gauge::V, 1.0, Background::flat(3))).max_abs() == 0.0);

    const SymMatrix ws = matrix_W(zero_jet(4, Gauge::W, 0.0, Background::round_sphere(4)));
    for (double e : symmetric_eigenvalues(ws)) CHECK(e == doctest::Approx(0.5));
    const SymMatrix us = matrix_U(zero_jet(4, Gauge::U, 1.0, Background::round_sphere(4)));
    CHECK(max_entry_diff(us, ws) < 1e-15);
    const SymMatrix vs = matrix_V(zero_jet(3, Gauge::V, 1.0, Background::round_sphere(3)));
    for (double e : symmetric_eigenvalues(vs)) CHECK(e == doctest::Approx(0.25));

    const SymMatrix w2 = matrix_W(log_jet(5, 2.0, {0.1, 0.7, -0.2, 0.3, 0.05}));
    CHECK(w2.max_abs() < 1e-12);
}

TEST_CASE("V = (n-2)/2 v W and U = e^w W against hand chain rule") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 3 + trial % 5;
        const Background bg = trial % 2 ? Background::flat(n) : Background::round_sphere(n);
        const ConformalJet w = oracle::random_w_jet(n, rng, bg);
        const double beta = 0.5 * (n - 2);
        const ConformalJet v = oracle::exp_jet(w, -beta, Gauge::V);
        const SymMatrix lhs = matrix_V(v);
        const SymMatrix rhs = matrix_W(w) * (beta * v.value);
        REQUIRE(max_entry_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.max_abs()));

        const ConformalJet u = oracle::exp_jet(w, 1.0, Gauge::U);
        const SymMatrix ul = matrix_U(u);
        const SymMatrix ur = matrix_W(w) * u.value;
        REQUIRE(max_entry_diff(ul, ur) <= 1e-12 * std::max(1.0, ul.max_abs()));

        // cone membership is gauge independent
        const ConeParams cone(n, 1 + trial % n);
        const EigenTuple lw(symmetric_eigenvalues(matrix_W(w)));
        const EigenTuple lv(symmetric_eigenvalues(lhs));
        REQUIRE(in_gamma_k(lw, cone) == in_gamma_k(lv, cone));
    }
}

TEST_CASE("Schouten eigenvalues with respect to g") {
    const double c = 0.3;
    const auto e = schouten_eigs_wrt_g(zero_jet(3, Gauge::W, c, Background::round_sphere(3)));
    for (double x : e.values()) CHECK(x == doctest::Approx(std::exp(2 * c) / 2));
    const auto z = schouten_eigs_wrt_g(log_jet(3, 2.0, {0.5, 0.1, 0.2}));
    for (double x : z.values()) CHECK(std::abs(x) < 1e-12);
    const auto flat = schouten_eigs_wrt_g(zero_jet(3, Gauge::W, 0.0, Background::flat(3)));
    for (double x : flat.values()) CHECK(x == 0.0);
}

TEST_CASE("Kelvin transform") {
    const int n = 4;
    RadialSample one{{0.5, 1.0, 2.0, 3.0}, {1.0, 1.0, 1.0, 1.0}};
    const RadialSample k1 = kelvin_transform(one, n);
    for (std::size_t i = 0; i < k1.r.size(); ++i) CHECK(k1.values[i] == doctest::Approx(std::pow(k1.r[i], 2 - n)));
    CHECK(std::is_sorted(k1.r.begin(), k1.r.end()));

    RadialSample fund{{0.5, 1.0, 2.0}, {}};
    for (double r : fund.r) fund.values.push_back(std::pow(r, 2 - n));
    for (double v : kelvin_transform(fund, n).values) CHECK(v == doctest::Approx(1.0));

    RadialSample any{{0.2, 0.9, 1.7, 4.0}, {0.3, 2.0, 0.7, 1.1}};
    const RadialSample twice = kelvin_transform(kelvin_transform(any, n), n);
    for (std::size_t i = 0; i < any.r.size(); ++i) {
        CHECK(twice.r[i] == doctest::Approx(any.r[i]).epsilon(1e-12));
        CHECK(twice.values[i] == doctest::Approx(any.values[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kelvin_transform(RadialSample{{0.0, 1.0}, {1.0, 1.0}}, n), DomainError);
}

TEST_CASE("conformal Laplacian residual") {
    CHECK(conformal_laplacian_residual(zero_jet(3, Gauge::V, 1.0, Background::flat(3))) == 0.0);
    for (int n = 3; n <= 6; ++n)
        CHECK(conformal_laplacian_residual(zero_jet(n, Gauge::V, 1.0, Background::round_sphere(n))) ==
              doctest::Approx((n - 2) * n / 4.0));
}

TEST_CASE("exponent conversion") {
    CHECK(exponent_from_power(3, 2, 0.0) == 1.0);
    CHECK(exponent_from_power(4, 3, 3.0) == 0.0);
    CHECK(exponent_from_power(3, 2, 4.0) == -1.0);
    CHECK(v_power_prefactor(3, 2) == doctest::Approx(4.0));
    CHECK(v_power_prefactor(4, 3) == doctest::Approx(1.0));
}
