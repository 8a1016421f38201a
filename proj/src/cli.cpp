#include "charfront/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "charfront/config.hpp"
#include "charfront/diagnostics.hpp"
#include "charfront/errors.hpp"
#include "charfront/io.hpp"
#include "charfront/oracle.hpp"

namespace charfront {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr int kExitHypotheses = 5;  // data outside the construction's hypotheses

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigError:
        case ErrorCode::BadParams:
        case ErrorCode::UnknownModel:
            return kExitConfig;
        case ErrorCode::InnerDiverged:
        case ErrorCode::OuterDiverged:
        case ErrorCode::NewtonDiverged:
        case ErrorCode::NoRoot:
        case ErrorCode::BoxExit:
            return kExitDivergence;
        case ErrorCode::EnvelopeViolation:
        case ErrorCode::BootstrapViolation:
        case ErrorCode::InsufficientSpan:
            return kExitValidation;
        case ErrorCode::NonHyperbolic:
        case ErrorCode::NoBlowup:
        case ErrorCode::Degenerate:
        case ErrorCode::NotInvertible:
        case ErrorCode::BracketViolation:
        case ErrorCode::NoShock:
            return kExitHypotheses;
    }
    return kExitConfig;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v == 0.0 ? 0.0 : v);
    return buf;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
}

struct Context {
    RunConfig cfg;
    std::string command;
    std::ostream& out;
    json report;

    std::string path(const std::string& name) const {
        return (std::filesystem::path(cfg.out_dir) / name).string();
    }
    void say(const std::string& line) const {
        if (!cfg.quiet) out << line << '\n';
    }
    void save_report(int code, const std::string& status) {
        json r;
        r["schema_version"] = kSchemaVersion;
        r["command"] = command;
        r["status"] = status;
        r["exit_code"] = code;
        for (auto& [k, v] : report.items()) r[k] = v;
        write_atomic(path("run_report.json"), r.dump(2) + "\n");
    }
};

json map_json(const AffineMap& m) {
    return {{"t_star", m.t_star}, {"x_star", m.x_star}, {"lambda0", m.lambda0},
            {"g", m.g},           {"L", m.L},           {"s_w", m.s_w}};
}

Problem prepare(const Context& ctx) {
    return prepare_problem(resolve_model(ctx.cfg), resolve_profile(ctx.cfg));
}

int cmd_analyze(Context& ctx) {
    const ModelBundle b = resolve_model(ctx.cfg);
    const Vec u = b.chart.u_ref;
    const EigenData ed = eigen_decompose(b.model, u);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < ed.lambdas.size(); ++k) gap = std::min(gap, ed.lambdas[k] - ed.lambdas[k - 1]);
    Vec gn;
    std::string flags;
    for (int k = 1; k <= b.model.n; ++k) {
        gn.push_back(genuine_nonlinearity(b.model, u, k));
        flags += (k > 1 ? "," : "") + std::string(std::abs(gn.back()) > 1e-6 ? "1" : "0");
    }
    const bool hyperbolic = b.model.n == 1 || gap > ctx.cfg.tol_eig;
    json a;
    a["schema_version"] = kSchemaVersion;
    a["model"] = b.model.name;
    a["n"] = b.model.n;
    a["family"] = b.model.family;
    a["u_ref"] = vec_json(u);
    a["eigenvalues"] = vec_json(ed.lambdas);
    a["genuine_nonlinearity"] = vec_json(gn);
    a["gap"] = std::isfinite(gap) ? json(gap) : json(nullptr);
    a["strictly_hyperbolic"] = hyperbolic;
    write_atomic(ctx.path("analysis.json"), a.dump(2) + "\n");
    ctx.report["analysis"] = a;
    ctx.say("model=" + b.model.name + " n=" + std::to_string(b.model.n) + " family=" +
            std::to_string(b.model.family) + " gap=" + fmt("%.6g", std::isfinite(gap) ? gap : 0.0) + " gn=[" +
            flags + "] hyperbolic=" + (hyperbolic ? "true" : "false"));
    return hyperbolic ? kExitOk : kExitValidation;
}

int cmd_blowup(Context& ctx) {
    const Problem p = prepare(ctx);
    const BlowupReport& r = p.blowup;
    json j;
    j["T_star"] = r.T_star;
    j["x_star"] = r.x_star;
    j["beta_star"] = r.beta_star;
    j["G_prime_min"] = r.Gp_min;
    j["G_second"] = r.Gpp;
    j["G_third"] = r.Gppp;
    j["unique"] = r.unique;
    j["nondegenerate"] = r.nondegenerate;
    j["warnings"] = r.warnings;
    j["normalization"] = map_json(p.normalized.map);
    ctx.report["blowup"] = j;
    ctx.say("T*=" + fmt("%.6f", r.T_star) + " x*=" + fmt("%.6f", r.x_star) +
            " nondegenerate=" + (r.nondegenerate ? "true" : "false"));
    return r.nondegenerate ? kExitOk : kExitHypotheses;
}

int cmd_preshock(Context& ctx) {
    const Problem p = prepare(ctx);
    const PreshockProfile& pr = p.preshock;
    CsvTable t({{"x", "xn"},
                {"w", "wn"},
                {"dw", "wn/xn"},
                {"d2w", "wn/xn^2"},
                {"r_two_term", "1"},
                {"r_slope", "1"},
                {"r_curvature", "1"}});
    const Vec grid = envelope_grid();
    for (double x : grid) {
        const PreshockDerivatives d = pr.derivatives(x);
        const double ax = std::abs(x), c = std::cbrt(x);
        t.add_row({x, d.w, d.w1, d.w2, std::abs(d.w + c - pr.a2 * c * c) / ax,
                   std::abs(d.w1 + 1.0 / (3.0 * c * c) - 2.0 * pr.a2 / (3.0 * c)),
                   std::abs(d.w2 - 2.0 / (9.0 * c * c * c * c * c)) * std::pow(ax, 4.0 / 3.0)});
    }
    t.save(ctx.path("preshock.csv"));
    json j;
    j["a2"] = pr.a2;
    j["a3"] = pr.a3;
    j["alpha2"] = pr.alpha2;
    j["alpha3"] = pr.alpha3;
    j["eta4"] = pr.eta4;
    j["M_env"] = p.envelopes.M_env;
    j["holder_slope"] = p.envelopes.holder_slope;
    j["holder_r2"] = p.envelopes.holder_r2;
    json bounds = json::array();
    for (const EnvelopeBound& b : p.envelopes.bounds)
        bounds.push_back({{"id", b.id}, {"constant", b.constant}, {"growth_slope", b.growth_slope}, {"bounded", b.bounded}});
    j["bounds"] = bounds;
    j["normalization"] = map_json(p.normalized.map);
    write_atomic(ctx.path("preshock.json"), json{{"schema_version", kSchemaVersion}, {"preshock", j}}.dump(2) + "\n");
    ctx.report["preshock"] = j;
    ctx.say("a2=" + fmt("%.10g", pr.a2) + " a3=" + fmt("%.10g", pr.a3) + " M_env=" + fmt("%.6g", p.envelopes.M_env) +
            " holder=" + fmt("%.6f", p.envelopes.holder_slope));
    return kExitOk;
}

struct FitRun {
    Problem problem;
    ShockFit fit;
    bool lax_ok = true;
    double rh_max = 0.0;
};

FitRun run_fit(Context& ctx) {
    FitRun r{prepare(ctx), {}, true, 0.0};
    const SimpleWaveData& d = r.problem.normalized.data;
    r.fit = fit_shock(d.model, d.chart, r.problem.preshock, ctx.cfg.controls);
    for (std::size_t k = 0; k < r.fit.trace.times.size(); ++k) {
        r.lax_ok = r.lax_ok && r.fit.trace.lax_ok[k];
        r.rh_max = std::max(r.rh_max, r.fit.trace.rh_residual[k]);
    }
    return r;
}

void write_fit(Context& ctx, const FitRun& r) {
    const ShockFit& f = r.fit;
    const JumpTrace& tr = f.trace;
    const std::size_t n = f.solution.n;
    CsvTable curve({{"t", "tau"},
                    {"phi", "xn"},
                    {"sigma", "xn/tau"},
                    {"jump_i", "wn"},
                    {"mean_i", "wn"},
                    {"lax_margin", "xn/tau"},
                    {"lax_ok", "1"},
                    {"rh_residual", "1"}});
    curve.add_row({0.0, 0.0, f.curve.sigma[0], 0.0, 0.0, 0.0, 1.0, 0.0});
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        curve.add_row({tr.times[k], f.curve.phi[k + 1], tr.sigma[k], tr.jump_i[k], tr.mean_i[k], tr.lax_margin[k],
                       tr.lax_ok[k] ? 1.0 : 0.0, tr.rh_residual[k]});
    curve.save(ctx.path("shock_curve.csv"));

    std::vector<CsvTable::Column> cols{{"t", "tau"}, {"z", "xn"}, {"side", "1"}};
    for (std::size_t c = 0; c < n; ++c) cols.push_back({"w_" + std::to_string(c + 1), "wn"});
    CsvTable fields(cols);
    const TwoSidedSolution& s = f.solution;
    for (std::size_t k = 0; k < s.t_grid.size(); ++k)
        for (int side = 0; side < 2; ++side) {
            Vec row{s.t_grid[k], 0.0, side == kMinus ? -1.0 : 1.0};
            for (std::size_t c = 0; c < n; ++c) row.push_back(s.trace[side][k * n + c]);
            fields.add_row(row);
            for (std::size_t a = 0; a < s.nz(); ++a) {
                row = {s.t_grid[k], s.z_grid[a], side == kMinus ? -1.0 : 1.0};
                for (std::size_t c = 0; c < n; ++c) row.push_back(s.at(side, k, a, c));
                fields.add_row(row);
            }
        }
    fields.save(ctx.path("fields.csv"));

    json j;
    j["model"] = r.problem.physical.model.name;
    j["eps"] = ctx.cfg.controls.eps;
    j["M"] = f.M;
    j["outer_iterations"] = f.outer_iterations;
    j["outer_changes"] = vec_json(f.outer_changes);
    j["outer_ratios"] = vec_json(f.outer_ratios);
    j["inner_iterations"] = f.inner_iterations;
    j["inner_ratio_max"] = vec_json(f.inner_ratio_max);
    j["phi_eps"] = f.curve.phi.back();
    j["sigma_eps"] = f.curve.sigma.back();
    j["lax_ok"] = r.lax_ok;
    j["rh_residual_max"] = r.rh_max;
    j["slope_range"] = vec_json({s.slope_min, s.slope_max});
    j["normalization"] = map_json(r.problem.normalized.map);
    j["M_env"] = r.problem.envelopes.M_env;
    ctx.report["fit"] = j;
}

int fit_status(const FitRun& r) { return r.lax_ok && r.rh_max < 1e-8 ? kExitOk : kExitValidation; }

int cmd_fit(Context& ctx) {
    const FitRun r = run_fit(ctx);
    write_fit(ctx, r);
    ctx.say("phi(eps)=" + fmt("%.10g", r.fit.curve.phi.back()) + " sigma(eps)=" + fmt("%.10g", r.fit.curve.sigma.back()) +
            " outer=" + std::to_string(r.fit.outer_iterations) + " M=" + fmt("%.6g", r.fit.M) +
            " lax=" + (r.lax_ok ? "ok" : "FAIL") + " rh=" + fmt("%.3g", r.rh_max));
    return fit_status(r);
}

FvState run_capture(const Context& ctx, const Problem& p) {
    const SimpleWaveData& d = p.normalized.data;
    const PreshockProfile& pr = p.preshock;
    auto init = [&](double x) { return d.chart.inverse(d.wbar(pr.sampler(x))); };
    FvOptions opt;
    opt.flux = ctx.cfg.flux == "lf" ? FvFlux::LaxFriedrichs : FvFlux::HLL;
    const double eps = ctx.cfg.controls.eps, w = ctx.cfg.window;
    return fv_run(d.model, init, -w, w, 0.0, eps, ctx.cfg.oracle_dx(), ctx.cfg.cfl, {0.0, 0.5 * eps}, opt);
}

json capture_json(const FvState& fv, double eps, const ShockLocation& loc) {
    return {{"cells", fv.cells},
            {"dx", fv.dx},
            {"steps", fv.steps},
            {"conservation_error", fv.conservation_error},
            {"shock_position", loc.position},
            {"shock_jump", vec_json(loc.jump)},
            {"t", eps}};
}

int cmd_capture(Context& ctx) {
    const Problem p = prepare(ctx);
    const FvState fv = run_capture(ctx, p);
    std::vector<CsvTable::Column> cols{{"t", "tau"}, {"x", "xn"}};
    for (std::size_t c = 0; c < fv.n; ++c) cols.push_back({"u_" + std::to_string(c + 1), "u"});
    CsvTable t(cols);
    for (const FvSnapshot& s : fv.snapshots)
        for (std::size_t k = 0; k < fv.cells; ++k) {
            Vec row{s.t, fv.center(k)};
            for (std::size_t c = 0; c < fv.n; ++c) row.push_back(s.u[k * fv.n + c]);
            t.add_row(row);
        }
    t.save(ctx.path("capture.csv"));
    const double eps = ctx.cfg.controls.eps;
    const ShockLocation loc = locate_shock(fv, eps);
    ctx.report["capture"] = capture_json(fv, eps, loc);
    ctx.say("shock=" + fmt("%.10g", loc.position) + " steps=" + std::to_string(fv.steps) +
            " conservation=" + fmt("%.3g", fv.conservation_error));
    return fv.conservation_error < 1e-12 ? kExitOk : kExitValidation;
}

int cmd_compare(Context& ctx) {
    const FitRun r = run_fit(ctx);
    write_fit(ctx, r);
    const FvState fv = run_capture(ctx, r.problem);
    const double eps = ctx.cfg.controls.eps;
    const ShockLocation loc = locate_shock(fv, eps);
    const double phi = r.fit.curve.phi.back(), diff = std::abs(loc.position - phi);
    const bool ok = diff <= 5.0 * fv.dx && fv.conservation_error < 1e-12;
    json j = capture_json(fv, eps, loc);
    j["phi_fit"] = phi;
    j["difference"] = diff;
    j["difference_in_cells"] = diff / fv.dx;
    j["tolerance_in_cells"] = 5.0;
    j["agree"] = ok;
    ctx.report["compare"] = j;
    write_atomic(ctx.path("compare.json"), json{{"schema_version", kSchemaVersion}, {"compare", j}}.dump(2) + "\n");
    ctx.say("phi_fit=" + fmt("%.10g", phi) + " phi_fv=" + fmt("%.10g", loc.position) + " diff/dx=" +
            fmt("%.3f", diff / fv.dx) + (ok ? " agree" : " DISAGREE"));
    return ok ? fit_status(r) : kExitValidation;
}

int cmd_verify(Context& ctx) {
    const FitRun r = run_fit(ctx);
    write_fit(ctx, r);
    const EstimateReport rep =
        envelope_suite(r.fit.solution, r.fit.curve, r.fit.trace, r.fit.M, &r.problem.envelopes, ctx.cfg.controls.parallel);
    json checks = json::array();
    if (!ctx.cfg.quiet) {
        char head[160];
        std::snprintf(head, sizeof head, "%-22s %12s %12s %10s %9s %9s  %s", "check", "fitted", "claimed", "ratio",
                      "exponent", "claimed", "status");
        ctx.out << head << '\n';
    }
    for (const EstimateCheck& c : rep.checks) {
        json e{{"id", c.id},
               {"variable", c.variable},
               {"fitted_constant", c.fitted_constant},
               {"claimed_constant", c.claimed_constant},
               {"worst_ratio", c.worst_ratio},
               {"passed", c.passed},
               {"samples", c.samples}};
        if (c.has_exponent) {
            e["fitted_exponent"] = c.fitted_exponent;
            e["claimed_exponent"] = c.claimed_exponent;
            e["exponent_r2"] = c.exponent_r2;
        }
        checks.push_back(e);
        if (!ctx.cfg.quiet) {
            char line[200];
            std::snprintf(line, sizeof line, "%-22s %12.4e %12.4e %10.3e %9s %9s  %s", c.id.c_str(), c.fitted_constant,
                          c.claimed_constant, c.worst_ratio, c.has_exponent ? fmt("%.4f", c.fitted_exponent).c_str() : "-",
                          c.has_exponent ? fmt("%.4f", c.claimed_exponent).c_str() : "-", c.passed ? "pass" : "FAIL");
            ctx.out << line << '\n';
        }
    }
    json j{{"slack", rep.slack},
           {"all_passed", rep.all_passed()},
           {"lax_ok", r.lax_ok},
           {"rh_residual_max", r.rh_max},
           {"checks", checks}};
    ctx.report["verify"] = j;
    write_atomic(ctx.path("verify.json"), json{{"schema_version", kSchemaVersion}, {"verify", j}}.dump(2) + "\n");
    const int status = rep.all_passed() ? fit_status(r) : kExitValidation;
    ctx.say(std::string("verify ") + (status == kExitOk ? "passed" : "FAILED") + ": " +
            std::to_string(std::count_if(rep.checks.begin(), rep.checks.end(), [](const EstimateCheck& c) { return c.passed; })) +
            "/" + std::to_string(rep.checks.size()) + " envelope checks, lax=" + (r.lax_ok ? "ok" : "FAIL") +
            " rh=" + fmt("%.3g", r.rh_max));
    return status;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shock formation from a simple-wave blowup: pre-shock expansion, fitted shock curve, FV cross-check",
                 "charfront"};
    std::string config_path, model, out_dir;
    double eps = 0.0, dx = 0.0;
    int grid_k = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "TOML-like run configuration");
    app.add_option("--model", model, "builtin model name (burgers, psystem, euler3, mhd7, linear_diag)");
    app.add_option("--eps", eps, "shock horizon in normalized time");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--grid-k", grid_k, "number of positive time levels");
    app.add_option("--dx", dx, "oracle cell width");
    app.add_flag("--quiet", quiet, "suppress the summary line");
    const char* names[][2] = {{"analyze", "eigenstructure and genuine nonlinearity at the reference state"},
                              {"blowup", "blowup time and point of the simple wave"},
                              {"preshock", "fractional expansion of the pre-shock profile"},
                              {"fit", "fit the shock curve"},
                              {"capture", "finite-volume capture from the pre-shock data"},
                              {"compare", "fitted versus captured shock position"},
                              {"verify", "envelope, Lax and Rankine-Hugoniot checks on a fitted run"}};
    for (auto& n : names) app.add_subcommand(n[0], n[1])->fallthrough();
    app.require_subcommand(1);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    if (const char* th = std::getenv("CHARFRONT_THREADS")) {
        const int n = std::atoi(th);
        if (n > 0) omp_set_num_threads(n);
    }

    Context ctx{RunConfig{}, command, out, json::object()};
    try {
        if (!config_path.empty()) ctx.cfg = load_config(config_path);
        if (!model.empty()) {
            ctx.cfg.model = model;
            ctx.cfg.manifest.clear();
        }
        if (eps != 0.0) ctx.cfg.controls.eps = eps;
        if (grid_k != 0) ctx.cfg.controls.time_levels = static_cast<std::size_t>(std::max(grid_k, 0));
        if (dx != 0.0) ctx.cfg.dx = dx;
        if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
        if (quiet) ctx.cfg.quiet = true;
        if (eps < 0.0 || grid_k < 0 || dx < 0.0) throw Error(ErrorCode::ConfigError, "negative flag value");
        validate_config(ctx.cfg);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        ctx.report["error"] = {{"code", error_name(e.code())}, {"message", e.what()}};
        if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
        try {
            ctx.save_report(kExitConfig, "error");
        } catch (const std::exception&) {
        }
        return kExitConfig;
    }

    int code = kExitOk;
    try {
        if (command == "analyze") code = cmd_analyze(ctx);
        else if (command == "blowup") code = cmd_blowup(ctx);
        else if (command == "preshock") code = cmd_preshock(ctx);
        else if (command == "fit") code = cmd_fit(ctx);
        else if (command == "capture") code = cmd_capture(ctx);
        else if (command == "compare") code = cmd_compare(ctx);
        else code = cmd_verify(ctx);
        ctx.save_report(code, code == kExitOk ? "ok" : "validation_failed");
    } catch (const Error& e) {
        code = exit_code_for(e.code());
        err << "error: " << e.what() << '\n';
        ctx.report["error"] = {{"code", error_name(e.code())}, {"message", e.what()}};
        try {
            ctx.save_report(code, "error");
        } catch (const std::exception&) {
        }
    } catch (const std::exception& e) {
        code = kExitConfig;
        err << "error: " << e.what() << '\n';
    }
    return code;
}

}  // namespace charfront
