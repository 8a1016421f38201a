#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"
#include "charfront/preshock.hpp"
#include "support.hpp"

using namespace charfront;

namespace {

ProfilePtr poly(Vec c) { return poly_bump_profile(std::move(c), 1.0, 0.0); }

// Root of beta^3 + beta^4 = x by bisection.
double cubic_quartic_root(double x) {
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 300; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid * mid * mid + mid * mid * mid * mid < x) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

PreshockProfile burgers_preshock() {
    const SimpleWaveData d = burgers_cubic_wave();
    return expand_preshock(normalize(d, find_blowup(d)).data);
}

}  // namespace

TEST_CASE("invert_eta0") {
    auto [a2, a3] = invert_eta0(0.0);
    CHECK(a2 == 0.0);
    CHECK(a3 == 0.0);
    std::tie(a2, a3) = invert_eta0(24.0);
    CHECK(a2 == doctest::Approx(-1.0 / 3.0));
    CHECK(a3 == doctest::Approx(1.0 / 3.0));
    for (double x : {1e-6, -1e-6, 1e-9}) {
        const double s = std::cbrt(x);
        const double series = s + a2 * s * s + a3 * x;
        CHECK(std::abs(series - cubic_quartic_root(x)) < 3.0 * std::pow(std::abs(x), 4.0 / 3.0));
    }
}

TEST_CASE("burgers preshock coefficients and sampler") {
    const PreshockProfile p = burgers_preshock();
    CHECK(std::abs(p.a2) < 1e-8);
    CHECK(p.a3 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.sampler(0.0) == 0.0);
    for (double x : {1e-9, 1e-6, -1e-4, 3e-3, -0.05}) {
        const double exact = -std::cbrt(x) + x;
        CHECK(p.sampler(x) == doctest::Approx(exact).epsilon(1e-9));
        CHECK(std::abs(p.sampler(x) - p.series(x)) < 1e-10 * std::cbrt(std::abs(x)) + 1e-7 * std::abs(x));
    }
}

TEST_CASE("explicit local data") {
    // w0'' = 2, eta = beta^3.
    const PreshockProfile a = expand_preshock(poly({0, -1, 1}), poly({0, 0, 0, 1}));
    CHECK(a.a2 == doctest::Approx(1.0).epsilon(1e-9));
    // w0 = -b + b^2 + b^3, eta = b^3 + b^4.
    const PreshockProfile b = expand_preshock(poly({0, -1, 1, 1}), poly({0, 0, 0, 1, 1}));
    CHECK(b.eta4 == doctest::Approx(24.0).epsilon(1e-6));
    CHECK(b.a2 == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(std::abs(b.a3) < 1e-6);
    for (double x : {1e-8, -1e-6, 1e-5, -1e-4}) {
        const double beta = cubic_quartic_root(x);
        CHECK(b.label(x) == doctest::Approx(beta).epsilon(1e-10));
        CHECK(b.sampler(x) == doctest::Approx(-beta + beta * beta + beta * beta * beta).epsilon(1e-10));
        CHECK(std::abs(b.sampler(x) - b.series(x)) < 10.0 * std::pow(std::abs(x), 4.0 / 3.0));
    }
}

TEST_CASE("non-normalized data is degenerate") {
    CHECK_THROWS_AS(expand_preshock(poly({0, -2, 0, 1}), poly({0, 0, 0, 1})), Error);
    CHECK_THROWS_AS(expand_preshock(poly({0, -1}), poly({0, 0, 1})), Error);
}

TEST_CASE("pure cube root has no curvature correction") {
    // w0 = -beta with eta = beta^3 gives w = -x^{1/3} exactly.
    const PreshockProfile p = expand_preshock(poly({0, -1}), poly({0, 0, 0, 1}));
    CHECK(p.a2 == 0.0);
    CHECK(p.a3 == 0.0);
    for (double x : {1e-6, 1e-3, -0.02}) {
        CHECK(p.sampler(x) == doctest::Approx(-std::cbrt(x)).epsilon(1e-12));
        CHECK(p.d2sampler(x) == doctest::Approx(2.0 / 9.0 * std::cbrt(x) / (x * x)).epsilon(1e-8));
    }
}

TEST_CASE("envelopes on the burgers profile") {
    const PreshockProfile p = burgers_preshock();
    const EnvelopeReport r = validate_envelopes(p, envelope_grid());
    REQUIRE(r.bounds.size() == 5);
    for (const EnvelopeBound& b : r.bounds) CHECK(b.bounded);
    for (const EnvelopeBound& b : r.bounds)
        if (b.id == "preshock_slope") CHECK(b.constant <= 1.05);
    CHECK(std::abs(r.holder_slope - 1.0 / 3.0) <= 0.01);
    CHECK(r.M_env > 0.0);
}

TEST_CASE("property: sampler is odd when the data is odd") {
    const PreshockProfile p = burgers_preshock();
    test::Gen g(8);
    for (int i = 0; i < 300; ++i) {
        const double x = std::pow(10.0, g.uniform(-9, -1.2));
        CHECK(p.sampler(-x) == doctest::Approx(-p.sampler(x)).epsilon(1e-10));
        CHECK(p.dsampler(-x) == doctest::Approx(p.dsampler(x)).epsilon(1e-8));
    }
}

TEST_CASE("property: derivative samplers agree with finite differences") {
    const PreshockProfile p = expand_preshock(poly({0, -1, 1, 1}), poly({0, 0, 0, 1, 1}));
    test::Gen g(12);
    for (int i = 0; i < 200; ++i) {
        const double x = (g.integer(0, 1) ? 1.0 : -1.0) * std::pow(10.0, g.uniform(-5, -1.5));
        const double h = 1e-4 * std::abs(x);
        const double d1 = (p.sampler(x + h) - p.sampler(x - h)) / (2 * h);
        const double d2 = (p.dsampler(x + h) - p.dsampler(x - h)) / (2 * h);
        const double d3 = (p.d2sampler(x + h) - p.d2sampler(x - h)) / (2 * h);
        CHECK(p.dsampler(x) == doctest::Approx(d1).epsilon(1e-6));
        CHECK(p.d2sampler(x) == doctest::Approx(d2).epsilon(1e-5));
        CHECK(p.d3sampler(x) == doctest::Approx(d3).epsilon(1e-4));
    }
}
