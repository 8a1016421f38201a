// Acceptance gate: every criterion at its stated tolerance, one line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "charfront/diagnostics.hpp"
#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"
#include "charfront/oracle.hpp"
#include "charfront/pipeline.hpp"
#include "charfront/shockfit.hpp"

using namespace charfront;

namespace {

struct Run {
    Problem problem;
    ShockControls controls;
    ShockFit fit;
    double seconds = 0.0;
    const SimpleWaveData& data() const { return problem.normalized.data; }
};

const Run& fitted(const std::string& name) {
    static std::map<std::string, Run> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    Run r;
    const auto start = std::chrono::steady_clock::now();
    r.problem = prepare_problem(builtin(name), default_profile(name));
    r.fit = fit_shock(r.data().model, r.data().chart, r.problem.preshock, r.controls);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cache.emplace(name, std::move(r)).first->second;
}

int failures = 0;

void line(int id, bool pass, const std::string& what, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("C%-2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
}

template <typename... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

void guarded(int id, const std::string& what, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        line(id, false, what, std::string("threw ") + e.what());
    }
}

void burgers_end_to_end() {
    const Run& b = fitted("burgers");
    const double eps = b.controls.eps;
    double phi_err = 0.0, sigma_err = 0.0, jump_err = 0.0, exact_err = 0.0;
    for (std::size_t k = 0; k < b.fit.curve.times.size(); ++k) {
        phi_err = std::max(phi_err, std::abs(b.fit.curve.phi[k]));
        sigma_err = std::max(sigma_err, std::abs(b.fit.curve.sigma[k]));
    }
    const JumpTrace& tr = b.fit.trace;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double t = tr.times[k];
        if (t < eps / 100) continue;
        const double exact = 2.0 * std::sqrt(t / (1.0 + t));
        jump_err = std::max(jump_err, std::abs(tr.jump_i[k] / exact - 1.0));
        // Characteristics give the right state -s/(1+t), s = sqrt(t/(1+t)).
        exact_err = std::max(exact_err, std::abs(tr.jump_i[k] / (exact / (1.0 + t)) - 1.0));
    }
    const bool ok = phi_err <= 1e-6 * eps && sigma_err <= 1e-6 && jump_err <= 0.02 && b.seconds < 60.0;
    line(1, ok, "Burgers end-to-end",
         fmt("max|phi|=%.2e (<=%.1e) max|sigma|=%.2e (<=1e-6) jump vs 2sqrt(t/(1+t)) rel err=%.2e (<=0.02) "
             "[vs 2s/(1+t): %.1e] runtime=%.2fs (<60s)",
             phi_err, 1e-6 * eps, sigma_err, jump_err, exact_err, b.seconds));
}

void bracket_law() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"burgers", "psystem", "euler3"}) {
        const Run& r = fitted(name);
        const double eps = r.controls.eps;
        double lo = 1e300, hi = -1e300;
        for (double t : geomspace(eps * r.controls.t_min_ratio, eps, 50)) {
            const auto [bm, bp] = beta_pm(r.problem.preshock, r.data().model, r.data().chart,
                                          r.fit.curve.phi_at(t), t);
            const double t32 = std::pow(t, 1.5);
            for (double q : {bp / t32, -bm / t32}) lo = std::min(lo, q), hi = std::max(hi, q);
        }
        ok = ok && lo > 0.75 && hi < 1.25;
        detail += fmt("%s [%.3f, %.3f] ", name, lo, hi);
    }
    line(2, ok, "Bracket law at 50 log times", detail + "(inside (0.75, 1.25))");
}

void holder_preshock() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"burgers", "psystem", "euler3"}) {
        const PreshockProfile& p = fitted(name).problem.preshock;
        Vec xs, ws;
        for (double x : geomspace(1e-8, 1e-3, 60))
            for (double s : {1.0, -1.0}) {
                xs.push_back(x);
                ws.push_back(p.sampler(s * x));
            }
        const double slope = loglog_fit(xs, ws).slope;
        ok = ok && std::abs(slope - 1.0 / 3.0) <= 0.01;
        detail += fmt("%s %.5f ", name, slope);
    }
    line(3, ok, "Pre-shock Holder exponent", detail + "(1/3 +- 0.01)");
}

void coefficient_formulas() {
    auto poly = [](Vec c) { return poly_bump_profile(std::move(c), 1.0, 0.0); };
    // w0 = -b + b^2 + b^3, eta = b^3 + b^4: w0'' = 2, w0''' = 6, eta4 = 24.
    const PreshockProfile p = expand_preshock(poly({0, -1, 1, 1}), poly({0, 0, 0, 1, 1}));
    const double alpha2 = -24.0 / 72.0, alpha3 = std::pow(24.0 / 24.0, 2) / 3.0;
    const double a2 = -alpha2 + 2.0 / 2.0, a3 = -alpha3 + alpha2 * 2.0 + 6.0 / 6.0;
    const double coef_err = std::max(std::abs(p.a2 - a2), std::abs(p.a3 - a3));
    Vec xs, res;
    double inversion_err = 0.0;
    for (double x : geomspace(1e-8, 1e-3, 40)) {
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 300; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid * mid * mid + mid * mid * mid * mid < x) lo = mid;
            else hi = mid;
        }
        const double b = 0.5 * (lo + hi);
        const double brute = -b + b * b + b * b * b;
        inversion_err = std::max(inversion_err, std::abs(p.sampler(x) - brute) / std::abs(brute));
        const double s = std::cbrt(x);
        xs.push_back(x);
        res.push_back(std::abs(brute - (-s + a2 * s * s + a3 * x)));
    }
    const double slope = loglog_fit(xs, res).slope;
    const bool ok = coef_err <= 1e-8 && inversion_err <= 1e-10 && slope >= 4.0 / 3.0 - 0.05;
    line(4, ok, "Coefficient formulas",
         fmt("a2=%.12f a3=%.3e |err|=%.2e (<=1e-8) sampler vs brute rel=%.1e residual slope=%.4f (>=%.4f)", p.a2,
             p.a3, coef_err, inversion_err, slope, 4.0 / 3.0 - 0.05));
}

void rh_and_lax() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"burgers", "psystem", "euler3"}) {
        const JumpTrace& tr = fitted(name).fit.trace;
        double rh = 0.0, margin = 1e300;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            rh = std::max(rh, tr.rh_residual[k]);
            margin = std::min(margin, tr.lax_margin[k]);
        }
        ok = ok && rh < 1e-8 && margin > 0.0;
        detail += fmt("%s rh=%.1e min margin=%.2e ", name, rh, margin);
    }
    line(5, ok, "RH and Lax on converged runs", detail + "(rh < 1e-8, margins > 0)");
}

void cubic_transverse() {
    const ModelBundle eu = builtin("euler3");
    const Vec um = eu.chart.u_ref;
    const Vec wm = eu.chart.forward(um);
    const std::size_t i = static_cast<std::size_t>(eu.model.index());
    Vec ji, jt;
    for (double s : geomspace(1e-3, 1e-1, 25)) {
        const RhConnection c = rh_connect(eu.model, um, s);
        const Vec jump = wm - eu.chart.forward(c.u_plus);
        double tr = 0.0;
        for (std::size_t j = 0; j < jump.size(); ++j)
            if (j != i) tr += jump[j] * jump[j];
        ji.push_back(std::abs(jump[i]));
        jt.push_back(std::sqrt(tr));
    }
    const LinearFit f = loglog_fit(ji, jt);
    line(6, std::abs(f.slope - 3.0) <= 0.1, "Cubic transverse jump (Euler)",
         fmt("slope=%.4f r2=%.5f (3 +- 0.1)", f.slope, f.r2));
}

void slope_at_origin() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"psystem", "euler3"}) {
        const Run& r = fitted(name);
        const AffineMap& m = r.problem.normalized.map;
        const ModelBundle& phys = r.problem.physical;
        // lambda_i at the state on the blowup point, from the physical model.
        const Vec u_star = phys.chart.inverse(m.w_star);
        const double lam = phys.model.lambda(u_star, phys.model.family);
        const double eps = r.controls.eps;
        Vec ts, qs;
        for (std::size_t k = 1; k < r.fit.curve.times.size(); ++k) {
            const double tau = r.fit.curve.times[k];
            if (tau < eps / 100) continue;
            const double t = tau / m.g;
            const double x = m.to_physical_x(r.fit.curve.phi[k], tau) - m.x_star;
            ts.push_back(t);
            qs.push_back(x / t - lam);
        }
        const LinearFit f = linear_fit(ts, qs);
        double bound = 0.0;
        for (std::size_t k = 0; k < ts.size(); ++k) bound = std::max(bound, std::abs(qs[k]) / ts[k]);
        // Intercept must vanish on the scale of the O(t) term over the window.
        const bool good = f.r2 >= 0.99 && std::abs(f.intercept) <= 0.05 * std::abs(f.slope) * ts.back();
        ok = ok && good;
        detail += fmt("%s lambda=%.6f C=%.4g intercept=%.2e r2=%.5f ", name, lam, bound, f.intercept, f.r2);
    }
    line(7, ok, "Shock slope at origin", detail + "(r2 >= 0.99)");
}

void oracle_agreement() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"burgers", "psystem"}) {
        const Run& r = fitted(name);
        const SimpleWaveData& d = r.data();
        const PreshockProfile& p = r.problem.preshock;
        const double eps = r.controls.eps, dx = eps / 2000;
        const FvState fv = fv_run(d.model, [&](double x) { return d.chart.inverse(d.wbar(p.sampler(x))); }, -0.1,
                                  0.1, 0.0, eps, dx, 0.45);
        const double pos = locate_shock(fv, eps).position;
        const double cells = std::abs(pos - r.fit.curve.phi.back()) / dx;
        ok = ok && cells <= 5.0 && fv.conservation_error < 1e-12;
        detail += fmt("%s fit=%.6e fv=%.6e diff=%.3f dx cons=%.1e ", name, r.fit.curve.phi.back(), pos, cells,
                      fv.conservation_error);
    }
    line(8, ok, "Oracle agreement at dx = eps/2000", detail + "(<= 5 dx, cons < 1e-12)");
}

void contraction() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"burgers", "psystem", "euler3"}) {
        const ShockFit& f = fitted(name).fit;
        double outer = 0.0, inner = 0.0;
        // outer_ratios[j] = d_{j+1} / d_j; criterion covers m >= 2.
        for (std::size_t j = 2; j < f.outer_ratios.size(); ++j) outer = std::max(outer, f.outer_ratios[j]);
        for (double q : f.inner_ratio_max) inner = std::max(inner, q);
        ok = ok && outer <= 0.95 && inner <= 0.7;
        detail += fmt("%s outer=%.3f inner=%.3f ", name, outer, inner);
    }
    const Run& r = fitted("psystem");
    const Vec t = shock_time_grid(r.controls);
    std::vector<Vec> guesses(3, Vec(t.size(), 0.0));
    for (std::size_t k = 0; k < t.size(); ++k) {
        guesses[1][k] = 0.1 * t[k] * t[k];
        guesses[2][k] = -0.1 * t[k] * t[k];
    }
    const UniquenessReport u =
        uniqueness_probe(r.data().model, r.data().chart, r.problem.preshock, r.controls, guesses);
    ok = ok && u.passed && u.max_distance < 10 * r.controls.tol_outer;
    line(9, ok, "Contraction and uniqueness",
         detail + fmt("uniqueness(psystem, 3 guesses) dist=%.2e (<%.0e)", u.max_distance, 10 * r.controls.tol_outer));
}

void mhd_eigenstructure() {
    const Params p{{"rho", 1.0}, {"H1", 1.0}, {"H2", 1.0}, {"H3", 1.0}, {"S", 0.0}};
    const ModelBundle b = builtin("mhd7", p);
    const Vec closed = mhd_closed_form_eigenvalues(p);
    const Vec lam = eigen_decompose(b.model, b.chart.u_ref).lambdas;
    double eig_err = 0.0;
    for (std::size_t k = 0; k < 7; ++k) eig_err = std::max(eig_err, std::abs(lam[k] - closed[k]));
    const bool pairing = std::abs(lam[3]) < 1e-10 && std::abs(lam[0] + lam[6]) < 1e-10 &&
                         std::abs(lam[1] + lam[5]) < 1e-10 && std::abs(lam[2] + lam[4]) < 1e-10;
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
    std::string flags;
    bool expected = true;
    for (int k = 1; k <= 7; ++k) {
        bool gn = true;
        for (int trial = 0; trial < 20; ++trial) {
            Vec u = b.chart.u_ref;
            for (double& x : u) x += jitter(rng);
            gn = gn && std::abs(genuine_nonlinearity(b.model, u, k)) > 1e-6;
        }
        flags += gn ? '1' : '0';
        expected = expected && (gn == (k != 4));
    }
    const bool ok = eig_err <= 1e-10 && pairing && expected;
    line(10, ok, "MHD eigenstructure",
         fmt("closed-form err=%.1e pairing=%s GN flags=%s (expected 1110111)", eig_err, pairing ? "ok" : "broken",
             flags.c_str()));
}

void envelope_exponents() {
    const Run& e = fitted("euler3");
    const EstimateReport rep =
        envelope_suite(e.fit.solution, e.fit.curve, e.fit.trace, e.fit.M, &e.problem.envelopes);
    std::string detail;
    bool ok = true;
    for (const EstimateCheck& c : rep.checks) {
        if (!c.has_exponent || c.samples == 0) continue;
        const bool good = std::abs(c.fitted_exponent - c.claimed_exponent) <= 0.07;
        ok = ok && good;
        detail += fmt("%s %.3f/%.3f%s C=%.3g; ", c.id.c_str(), c.fitted_exponent, c.claimed_exponent,
                      good ? "" : "!", c.fitted_constant);
    }
    line(11, ok, "Envelope exponents (Euler, +-0.07)", detail);
}

}  // namespace

int main() {
    guarded(1, "Burgers end-to-end", burgers_end_to_end);
    guarded(2, "Bracket law at 50 log times", bracket_law);
    guarded(3, "Pre-shock Holder exponent", holder_preshock);
    guarded(4, "Coefficient formulas", coefficient_formulas);
    guarded(5, "RH and Lax on converged runs", rh_and_lax);
    guarded(6, "Cubic transverse jump (Euler)", cubic_transverse);
    guarded(7, "Shock slope at origin", slope_at_origin);
    guarded(8, "Oracle agreement at dx = eps/2000", oracle_agreement);
    guarded(9, "Contraction and uniqueness", contraction);
    guarded(10, "MHD eigenstructure", mhd_eigenstructure);
    guarded(11, "Envelope exponents (Euler, +-0.07)", envelope_exponents);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
