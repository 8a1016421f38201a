#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "charfront/errors.hpp"
#include "charfront/linalg.hpp"
#include "charfront/numerics.hpp"
#include "support.hpp"

using namespace charfront;

namespace {

// Random matrix with prescribed well separated real spectrum: S diag S^-1.
Matrix similar_to_diag(test::Gen& g, const Vec& d) {
    const std::size_t n = d.size();
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = g.uniform(-1, 1) + (i == j ? 2.0 : 0.0);
    return s * Matrix::diag(d) * inverse(s);
}

}  // namespace

TEST_CASE("lu solves and inverts") {
    test::Gen g(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = static_cast<std::size_t>(g.integer(1, 7));
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = g.uniform(-1, 1) + (i == j ? n : 0.0);
        Vec b(n);
        for (double& v : b) v = g.uniform(-1, 1);
        CHECK(norm_inf(a * solve(a, b) - b) < 1e-12);
        CHECK((a * inverse(a) - Matrix::identity(n)).max_abs() < 1e-12);
    }
}

TEST_CASE("eigensystem residual and biorthogonality") {
    test::Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(g.integer(1, 7));
        Vec d(n);
        for (std::size_t k = 0; k < n; ++k) d[k] = static_cast<double>(k) * 1.5 + g.uniform(-0.4, 0.4);
        const Matrix a = similar_to_diag(g, d);
        const EigenSystem es = eigensystem(a);
        REQUIRE(es.lambdas.size() == n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(std::abs(es.lambdas[k] - d[k]) < 1e-8);
            const Vec r = es.rights.column(k);
            CHECK(norm_inf(a * r - es.lambdas[k] * r) < 1e-8 * (1 + a.max_abs()));
            CHECK(std::abs(norm2(r) - 1.0) < 1e-12);
        }
        CHECK((es.lefts * es.rights - Matrix::identity(n)).max_abs() < 1e-9);
    }
}

TEST_CASE("complex pair is rejected") {
    Matrix a(2, 2);
    a(0, 1) = -1.0;
    a(1, 0) = 1.0;
    CHECK_THROWS_AS(real_eigenvalues(a), Error);
}

TEST_CASE("hessenberg with a denormal subdiagonal entry") {
    Matrix a(3, 3);
    a(0, 0) = -3.870577;
    a(0, 1) = 3.188768;
    a(1, 0) = 4.9e-324;
    a(1, 1) = -3.870577;
    a(1, 2) = 1.275507;
    a(2, 1) = 11.160688;
    a(2, 2) = -3.870577;
    const Vec lam = real_eigenvalues(a);
    const double s = std::sqrt(1.275507 * 11.160688);
    REQUIRE(lam.size() == 3);
    CHECK(lam[0] == doctest::Approx(-3.870577 - s).epsilon(1e-12));
    CHECK(lam[1] == doctest::Approx(-3.870577).epsilon(1e-12));
    CHECK(lam[2] == doctest::Approx(-3.870577 + s).epsilon(1e-12));
}

TEST_CASE("linear fit recovers a line") {
    const Vec x = linspace(0, 3, 20);
    Vec y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = 2.5 * x[k] - 1.0;
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
    const Vec xs = geomspace(1e-3, 1, 30);
    Vec ys(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = -4.0 * std::pow(xs[k], 0.7);
    CHECK(loglog_fit(xs, ys).slope == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("gradient is exact on quadratics over a non-uniform grid") {
    Vec t = geomspace(0.01, 2.0, 40);
    Vec y(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) y[k] = 3 * t[k] * t[k] - t[k] + 0.5;
    const Vec d = gradient(t, y);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(d[k] == doctest::Approx(6 * t[k] - 1).epsilon(1e-10));
}

TEST_CASE("cumulative trapezoid is exact on linear integrands") {
    const Vec t = geomspace(0.1, 3.0, 25);
    Vec f(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) f[k] = 2 * t[k] + 1;
    const Vec c = cumulative_trapezoid(t, f);
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double exact = t[k] * t[k] + t[k] - (t[0] * t[0] + t[0]);
        CHECK(c[k] == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("gauss legendre integrates polynomials of degree 2q-1 exactly") {
    for (int q : {5, 8, 16}) {
        const QuadratureRule& r = gauss_legendre_unit(q);
        for (int p = 0; p <= 2 * q - 1; ++p) {
            double s = 0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
            CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("bracketed root and golden section") {
    const double r = bracketed_root([](double x) { return x * x * x - 2; }, [](double x) { return 3 * x * x; },
                                    0, 2);
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
    const double r2 = bracketed_root([](double x) { return std::cos(x) - x; }, nullptr, 0, 1);
    CHECK(std::abs(std::cos(r2) - r2) < 1e-14);
    const double m = golden_section_min([](double x) { return (x - 0.3) * (x - 0.3); }, -1, 1, 1e-9);
    CHECK(m == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("pchip interpolates and preserves monotonicity") {
    test::Gen g(3);
    for (int trial = 0; trial < 30; ++trial) {
        Vec x{0.0}, y{0.0};
        for (int k = 0; k < 12; ++k) {
            x.push_back(x.back() + g.uniform(0.05, 1.0));
            y.push_back(y.back() + g.uniform(0.0, 2.0));
        }
        const Pchip p(x, y);
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(p(x[k]) == doctest::Approx(y[k]).epsilon(1e-14));
        double prev = p(x.front());
        for (double q : linspace(x.front(), x.back(), 500)) {
            const double v = p(q);
            CHECK(v >= prev - 1e-12);
            CHECK(p.derivative(q) >= -1e-12);
            prev = v;
        }
    }
}
