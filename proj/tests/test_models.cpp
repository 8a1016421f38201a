#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "charfront/errors.hpp"
#include "charfront/models.hpp"
#include "support.hpp"

using namespace charfront;

namespace {

Vec euler_state(double rho, double u, double p, double gamma = 1.4) {
    return {rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u * u};
}

Vec mhd_state(double rho, double u1, double u2, double u3, double H2, double H3, double S) {
    return {rho, rho * u1, rho * u2, rho * u3, H2, H3, rho * S};
}

std::vector<Vec> box_corners(const Vec& c, double r) {
    std::vector<Vec> out;
    const std::size_t n = c.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Vec u = c;
        for (std::size_t k = 0; k < n; ++k) u[k] += (mask >> k & 1) ? r : -r;
        out.push_back(u);
    }
    out.push_back(c);
    return out;
}

void check_biorthonormal(const SystemModel& m, const Vec& u) {
    const EigenData ed = eigen_decompose(m, u);
    const Matrix a = m.jacobian(u);
    const std::size_t n = ed.lambdas.size();
    CHECK((ed.lefts * ed.rights - Matrix::identity(n)).max_abs() < 1e-9);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec r = ed.rights.column(k);
        CHECK(norm_inf(a * r - ed.lambdas[k] * r) < 1e-9 * (1 + a.max_abs()));
    }
}

}  // namespace

TEST_CASE("burgers eigen data") {
    const ModelBundle b = builtin("burgers");
    const EigenData ed = eigen_decompose(b.model, {0.3});
    CHECK(ed.lambdas[0] == doctest::Approx(0.3));
    CHECK(ed.rights(0, 0) == doctest::Approx(1.0));
    CHECK(ed.lefts(0, 0) == doctest::Approx(1.0));
    CHECK(genuine_nonlinearity(b.model, {0.3}, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("linear_diag eigen data") {
    const ModelBundle b = builtin("linear_diag");
    const EigenData ed = eigen_decompose(b.model, {0.1, 0.2, 0.3});
    CHECK(norm_inf(ed.lambdas - Vec{-1.0, 0.0, 1.0}) < 1e-14);
    CHECK((ed.rights - Matrix::identity(3)).max_abs() < 1e-12);
    CHECK((ed.lefts - Matrix::identity(3)).max_abs() < 1e-12);
}

TEST_CASE("euler reference eigenvalues and contact degeneracy") {
    const ModelBundle b = builtin("euler3", {{"rho", 1}, {"u", 0}, {"p", 1}, {"gamma", 1.4}});
    const Vec u = euler_state(1, 0, 1);
    const Vec lam = eigen_decompose(b.model, u).lambdas;
    const double c = std::sqrt(1.4);
    CHECK(lam[0] == doctest::Approx(-c).epsilon(1e-10));
    CHECK(std::abs(lam[1]) < 1e-10);
    CHECK(lam[2] == doctest::Approx(c).epsilon(1e-10));
    CHECK(std::abs(genuine_nonlinearity(b.model, u, 2)) < 1e-6);
    CHECK(std::abs(genuine_nonlinearity(b.model, u, 3)) > 0.1);
}

TEST_CASE("psystem genuine nonlinearity against the symbolic value") {
    for (double gamma : {1.4, 2.0, 3.0}) {
        const ModelBundle b = builtin("psystem", {{"gamma", gamma}});
        // lambda_2 = c(v) = sqrt(gamma) v^{-(gamma+1)/2}; r_2 is parallel to (1, -c).
        const double c = std::sqrt(gamma);
        const double dc_dv = -0.5 * (gamma + 1.0) * c;
        Vec r{1.0, -c};
        const double len = std::hypot(r[0], r[1]);
        r = (1.0 / len) * r;
        if (std::abs(r[1]) > std::abs(r[0])) r = -1.0 * r;
        const double expected = dc_dv * r[0];
        CHECK(std::abs(expected) == doctest::Approx((gamma + 1) / 2 * c / std::sqrt(1 + gamma)));
        CHECK(genuine_nonlinearity(b.model, {1.0, 0.0}, 2) == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("mhd eigenvalues match the closed forms") {
    const Params p{{"rho", 1.3}, {"H1", 0.8}, {"H2", 0.6}, {"H3", -0.4}, {"S", 0.2}};
    const ModelBundle b = builtin("mhd7", p);
    const Vec closed = mhd_closed_form_eigenvalues(p);
    const Vec lam = eigen_decompose(b.model, b.chart.u_ref).lambdas;
    REQUIRE(lam.size() == 7);
    for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(lam[k] - closed[k]) < 1e-10);
    CHECK(std::abs(lam[3]) < 1e-10);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(lam[k] + lam[6 - k]) < 1e-10);
    CHECK(lam[1] == doctest::Approx(-0.8 / std::sqrt(1.3)).epsilon(1e-10));
}

TEST_CASE("hyperbolicity gap") {
    const ModelBundle diag = builtin("linear_diag");
    CHECK(hyperbolicity_gap(diag.model, {{0, 0, 0}, {1, 2, 3}}) == doctest::Approx(1.0));
    const ModelBundle burgers = builtin("burgers");
    CHECK(std::isinf(hyperbolicity_gap(burgers.model, {{0.0}, {1.0}})));
    const ModelBundle euler = builtin("euler3");
    const double gap = hyperbolicity_gap(euler.model, box_corners(euler_state(1, 0, 1), 0.05));
    CHECK(std::abs(gap / std::sqrt(1.4) - 1.0) <= 0.05);
    CHECK_THROWS_AS(hyperbolicity_gap(euler.model, {{100.0, 0.0, 1.0}}), Error);
}

TEST_CASE("bad parameters and unknown models") {
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::ConfigError;
    };
    CHECK(code_of([] { builtin("navier"); }) == ErrorCode::UnknownModel);
    CHECK(code_of([] { builtin("mhd7", {{"H2", 0.0}}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { builtin("mhd7", {{"rho", -1.0}}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { builtin("psystem", {{"gamma", 0.5}}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { builtin("euler3", {{"p", 0.0}}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { builtin("euler3", {{"family", 4}}); }) == ErrorCode::BadParams);
}

TEST_CASE("polynomial manifest reproduces burgers") {
    const ModelBundle b = load_manifest_text(
        R"({"n": 1, "family": 1, "box": {"lo": [-2], "hi": [2]},
            "flux": [[{"coef": 0.5, "powers": [2]}]]})");
    CHECK(b.model.eigenvalues({0.3})[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(genuine_nonlinearity(b.model, {0.3}, 1) == doctest::Approx(1.0).epsilon(1e-8));
    const ModelBundle viaBuiltin = load_manifest_text(R"({"builtin": "psystem", "params": {"gamma": 2}})");
    CHECK(viaBuiltin.model.name == "psystem");
    CHECK_THROWS_AS(load_manifest_text("{not json"), Error);
}

TEST_CASE("property: biorthonormal eigenvectors over random admissible states") {
    test::Gen g(2024);
    const ModelBundle ps = builtin("psystem");
    const ModelBundle eu = builtin("euler3");
    const ModelBundle mh = builtin("mhd7");
    for (int i = 0; i < 1000; ++i) {
        switch (i % 3) {
        case 0: check_biorthonormal(ps.model, {g.uniform(0.2, 5.0), g.uniform(-5, 5)}); break;
        case 1:
            check_biorthonormal(eu.model, euler_state(g.uniform(0.2, 5), g.uniform(-3, 3), g.uniform(0.2, 5)));
            break;
        default:
            check_biorthonormal(mh.model, mhd_state(g.uniform(0.5, 2), g.uniform(-1, 1), g.uniform(-1, 1),
                                                    g.uniform(-1, 1), g.uniform(0.3, 2), g.uniform(0.3, 2),
                                                    g.uniform(-1, 1)));
        }
    }
}

TEST_CASE("property: analytic jacobians agree with finite differences") {
    test::Gen g(5);
    const ModelBundle eu = builtin("euler3");
    const ModelBundle mh = builtin("mhd7");
    const ModelBundle ps = builtin("psystem");
    for (int i = 0; i < 200; ++i) {
        const Vec ue = euler_state(g.uniform(0.2, 5), g.uniform(-3, 3), g.uniform(0.2, 5));
        CHECK((eu.model.jacobian(ue) - eu.model.fd_jacobian(ue)).max_abs() < 1e-5 * (1 + ue[2]));
        const Vec um = mhd_state(g.uniform(0.5, 2), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1),
                                 g.uniform(0.3, 2), g.uniform(0.3, 2), g.uniform(-1, 1));
        CHECK((mh.model.jacobian(um) - mh.model.fd_jacobian(um)).max_abs() < 1e-5);
        const Vec up{g.uniform(0.3, 5), g.uniform(-5, 5)};
        CHECK((ps.model.jacobian(up) - ps.model.fd_jacobian(up)).max_abs() < 1e-5);
    }
}

TEST_CASE("property: chart round trip") {
    test::Gen g(17);
    for (const char* name : {"burgers", "psystem", "euler3", "mhd7", "linear_diag"}) {
        const ModelBundle b = builtin(name);
        const std::size_t n = static_cast<std::size_t>(b.model.n);
        CHECK(norm_inf(b.chart.forward(b.chart.u_ref)) < 1e-12);
        for (int i = 0; i < 200; ++i) {
            Vec w(n);
            for (double& v : w) v = g.uniform(-0.2, 0.2);
            const Vec back = b.chart.forward(b.chart.inverse(w));
            CHECK(norm_inf(back - w) < 1e-10);
        }
    }
}

TEST_CASE("property: eigenvalues vary continuously along segments") {
    test::Gen g(99);
    const ModelBundle eu = builtin("euler3");
    for (int s = 0; s < 50; ++s) {
        const Vec a = euler_state(g.uniform(0.5, 2), g.uniform(-1, 1), g.uniform(0.5, 2));
        const Vec b = euler_state(g.uniform(0.5, 2), g.uniform(-1, 1), g.uniform(0.5, 2));
        Vec prev = eu.model.eigenvalues(a);
        const int steps = 200;
        for (int k = 1; k <= steps; ++k) {
            const double th = static_cast<double>(k) / steps;
            const Vec u = a + th * (b - a);
            const Vec lam = eu.model.eigenvalues(u);
            CHECK(norm_inf(lam - prev) < 0.1);
            prev = lam;
        }
    }
}

TEST_CASE("shifted model translates and scales the spectrum") {
    const ModelBundle ps = builtin("psystem");
    const SystemModel m = shifted_model(ps.model, 0.5, 2.0);
    const Vec lam0 = ps.model.eigenvalues({1.2, 0.1});
    const Vec lam = m.eigenvalues({1.2, 0.1});
    for (std::size_t k = 0; k < 2; ++k) CHECK(lam[k] == doctest::Approx((lam0[k] - 0.5) / 2.0));
    CHECK((m.jacobian({1.2, 0.1}) - m.fd_jacobian({1.2, 0.1})).max_abs() < 1e-6);
}
