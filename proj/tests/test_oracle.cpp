#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <omp.h>

#include <cmath>

#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"
#include "charfront/oracle.hpp"
#include "charfront/pipeline.hpp"

using namespace charfront;

namespace {

std::function<Vec(double)> step(double x0, double left, double right) {
    return [=](double x) { return Vec{x < x0 ? left : right}; };
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("constant data stays constant") {
    const ModelBundle eu = builtin("euler3");
    const Vec u0 = eu.chart.u_ref;
    const FvState s = fv_run(eu.model, [&](double) { return u0; }, -1, 1, 0, 0.3, 0.01, 0.45);
    for (std::size_t k = 0; k < s.cells; ++k)
        for (std::size_t c = 0; c < 3; ++c) CHECK(s.snapshots.back().u[k * 3 + c] == u0[c]);
}

TEST_CASE("burgers riemann shock moves at the RH speed") {
    const ModelBundle b = builtin("burgers");
    for (FvFlux flux : {FvFlux::HLL, FvFlux::LaxFriedrichs}) {
        FvOptions o;
        o.flux = flux;
        const double dx = 1e-3;
        const FvState s = fv_run(b.model, step(0.0, 1.0, 0.0), -0.5, 1.5, 0, 1.0, dx, 0.45, {0.5}, o);
        const double x1 = locate_shock(s, 0.5).position, x2 = locate_shock(s, 1.0).position;
        CHECK(std::abs((x2 - x1) / 0.5 - 0.5) < 4 * dx);
        CHECK(std::abs(x2 - 0.5) < 5 * dx);
        CHECK(std::abs(locate_shock(s, 1.0).jump[0] - 1.0) <= 0.02);
        CHECK(s.conservation_error < 1e-12);
    }
}

TEST_CASE("exact step at a cell boundary") {
    const ModelBundle b = builtin("burgers");
    const double dx = 0.01;
    const FvState s = fv_run(b.model, step(0.0, 1.0, -1.0), -1, 1, 0, 0.0, dx, 0.45);
    CHECK(std::abs(locate_shock(s, 0.0).position) <= dx / 2);
}

TEST_CASE("burgers pre-shock data keeps the shock at the origin") {
    const Problem p = prepare_problem(builtin("burgers"), default_profile("burgers"));
    const double eps = 0.05, dx = eps / 1000;
    const FvState s = fv_run(p.normalized.data.model, [&](double x) { return Vec{p.preshock.sampler(x)}; },
                             -0.1, 0.1, 0, eps, dx, 0.45);
    CHECK(std::abs(locate_shock(s, eps).position) <= 2 * dx);
    CHECK(s.conservation_error < 1e-12);
}

TEST_CASE("serial and parallel stepping agree bitwise") {
    const ModelBundle ps = builtin("psystem");
    auto init = [](double x) { return Vec{x < 0.1 ? 1.0 : 1.3, x < 0.1 ? 0.2 : 0.0}; };
    omp_set_num_threads(4);
    FvOptions o;
    o.parallel = true;
    const FvState par = fv_run(ps.model, init, -1, 1, 0, 0.2, 2e-3, 0.45, {}, o);
    o.parallel = false;
    const FvState ser = fv_run(ps.model, init, -1, 1, 0, 0.2, 2e-3, 0.45, {}, o);
    CHECK(par.snapshots.back().u == ser.snapshots.back().u);
    CHECK(par.steps == ser.steps);
    CHECK(par.conservation_error < 1e-12);
}

TEST_CASE("errors") {
    const ModelBundle b = builtin("burgers");
    CHECK(code_of([&] { fv_run(b.model, step(0, 11.0, 0.0), -1, 1, 0, 0.1, 0.01, 0.45); }) ==
          ErrorCode::BoxExit);
    const FvState smooth =
        fv_run(b.model, [](double x) { return Vec{0.1 * std::sin(x)}; }, -1, 1, 0, 0.1, 0.01, 0.45);
    CHECK(code_of([&] { locate_shock(smooth, 0.1); }) == ErrorCode::NoShock);
}

TEST_CASE("captured shock position converges with the grid") {
    // Galilean shift of the Burgers pre-shock: the shock sits exactly at c t.
    const Problem p = prepare_problem(builtin("burgers"), default_profile("burgers"));
    const double eps = 0.05, c = 0.3;
    Vec dxs, errs;
    for (double dx : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
        const FvState s = fv_run(p.normalized.data.model, [&](double x) { return Vec{c + p.preshock.sampler(x)}; },
                                 -0.1, 0.12, 0, eps, dx, 0.45);
        const double err = std::abs(locate_shock(s, eps).position - c * eps);
        MESSAGE("dx " << dx << " error " << err);
        dxs.push_back(dx);
        errs.push_back(err);
    }
    CHECK(loglog_fit(dxs, errs).slope >= 0.8);
}
