#include "charfront/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "charfront/errors.hpp"

namespace charfront {

bool Box::contains(const Vec& u) const {
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!(u[k] >= lo[k] && u[k] <= hi[k])) return false;
    return true;
}

Vec Box::center() const {
    Vec c(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) c[k] = 0.5 * (lo[k] + hi[k]);
    return c;
}

double Box::radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lo.size(); ++k) r = std::min(r, 0.5 * (hi[k] - lo[k]));
    return r;
}

Matrix SystemModel::fd_jacobian(const Vec& u) const {
    const std::size_t m = static_cast<std::size_t>(n);
    Matrix jac(m, m);
    Vec up = u, um = u;
    for (std::size_t j = 0; j < m; ++j) {
        const double h = jacobian_step(u[j]);
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        const Vec fp = flux(up), fm = flux(um);
        for (std::size_t i = 0; i < m; ++i) jac(i, j) = (fp[i] - fm[i]) / (2 * h);
        up[j] = um[j] = u[j];
    }
    return jac;
}

Matrix SystemModel::jacobian(const Vec& u) const {
    return jacobian_fn ? jacobian_fn(u) : fd_jacobian(u);
}

Vec SystemModel::eigenvalues(const Vec& u) const {
    if (eigenvalues_fn) return eigenvalues_fn(u);
    return real_eigenvalues(jacobian(u));
}

Matrix CoordinateChart::inverse_jacobian(const Vec& w) const {
    const std::size_t n = w.size();
    Matrix d(n, n);
    Vec wp = w, wm = w;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(w[j]));
        wp[j] = w[j] + h;
        wm[j] = w[j] - h;
        const Vec up = inverse(wp), um = inverse(wm);
        for (std::size_t i = 0; i < n; ++i) d(i, j) = (up[i] - um[i]) / (2 * h);
        wp[j] = wm[j] = w[j];
    }
    return d;
}

Matrix CoordinateChart::forward_jacobian(const Vec& u) const {
    const std::size_t n = u.size();
    Matrix d(n, n);
    Vec up = u, um = u;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = jacobian_step(u[j]);
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        const Vec wp = forward(up), wm = forward(um);
        for (std::size_t i = 0; i < n; ++i) d(i, j) = (wp[i] - wm[i]) / (2 * h);
        up[j] = um[j] = u[j];
    }
    return d;
}

EigenData eigen_decompose(const SystemModel& model, const Vec& u) {
    if (!model.box.contains(u))
        throw Error(ErrorCode::NonHyperbolic, "state outside admissible box of " + model.name);
    return eigensystem(model.jacobian(u), kTolDegenerate);
}

double genuine_nonlinearity(const SystemModel& model, const Vec& u, int k) {
    const EigenData ed = eigen_decompose(model, u);
    const Vec r = ed.rights.column(static_cast<std::size_t>(k - 1));
    const double h = kStepGN;
    const Vec up = u + h * r, um = u - h * r;
    return (model.lambda(up, k) - model.lambda(um, k)) / (2 * h);
}

double hyperbolicity_gap(const SystemModel& model, const std::vector<Vec>& samples) {
    double gap = std::numeric_limits<double>::infinity();
    for (const Vec& u : samples) {
        if (!model.box.contains(u))
            throw Error(ErrorCode::NonHyperbolic, "sample outside admissible box");
        const Vec lam = model.eigenvalues(u);
        for (std::size_t k = 1; k < lam.size(); ++k) {
            const double g = lam[k] - lam[k - 1];
            if (!(g > kTolDegenerate)) throw Error(ErrorCode::NonHyperbolic, "eigenvalues coalesce");
            gap = std::min(gap, g);
        }
    }
    return gap;
}

CharacteristicCoefficients characteristic_coefficients(const SystemModel& model,
                                                       const CoordinateChart& chart,
                                                       const Vec& w) {
    const std::size_t n = w.size();
    CharacteristicCoefficients cc;
    if (n == 1) {
        cc.lambda = model.eigenvalues(chart.inverse(w));
        cc.p = Matrix(1, 1);
        return cc;
    }
    const Vec u = chart.inverse(w);
    const EigenSystem es = eigensystem(model.jacobian(u), kTolDegenerate);
    const Matrix lw = es.lefts * chart.inverse_jacobian(w);
    cc.lambda = es.lambdas;
    cc.p = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m)
            if (m != k) cc.p(k, m) = lw(k, m) / lw(k, k);
    return cc;
}

namespace {

double param(const Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

CoordinateChart shift_chart(const Vec& u_ref, Box box) {
    CoordinateChart c;
    c.u_ref = u_ref;
    c.forward = [u_ref](const Vec& u) { return u - u_ref; };
    c.inverse = [u_ref](const Vec& w) { return w + u_ref; };
    c.applicable_box = std::move(box);
    c.trivial = true;
    return c;
}

ModelBundle make_burgers(const Params& p) {
    ModelBundle b;
    SystemModel& m = b.model;
    m.name = "burgers";
    m.n = 1;
    m.family = 1;
    m.box = {{-10.0}, {10.0}};
    m.flux = [](const Vec& u) { return Vec{0.5 * u[0] * u[0]}; };
    m.jacobian_fn = [](const Vec& u) {
        Matrix j(1, 1);
        j(0, 0) = u[0];
        return j;
    };
    m.eigenvalues_fn = [](const Vec& u) { return Vec{u[0]}; };
    b.chart = shift_chart({param(p, "u_ref", 0.0)}, m.box);
    return b;
}

ModelBundle make_linear_diag(const Params& p) {
    ModelBundle b;
    SystemModel& m = b.model;
    m.name = "linear_diag";
    m.n = 3;
    m.family = static_cast<int>(param(p, "family", 3));
    m.box = {{-10, -10, -10}, {10, 10, 10}};
    m.flux = [](const Vec& u) { return Vec{-u[0], 0.0, u[2]}; };
    m.jacobian_fn = [](const Vec&) { return Matrix::diag({-1.0, 0.0, 1.0}); };
    m.eigenvalues_fn = [](const Vec&) { return Vec{-1.0, 0.0, 1.0}; };
    b.chart = shift_chart({0.0, 0.0, 0.0}, m.box);
    return b;
}

// p-system: v_t - u_x = 0, u_t + p(v)_x = 0 with p = v^-gamma.
ModelBundle make_psystem(const Params& p) {
    const double gamma = param(p, "gamma", 1.4);
    const double v_ref = param(p, "v", 1.0);
    const double u_ref = param(p, "u", 0.0);
    if (!(gamma > 1.0) || !(v_ref > 0.0)) throw Error(ErrorCode::BadParams, "psystem needs gamma > 1, v > 0");
    ModelBundle b;
    SystemModel& m = b.model;
    m.name = "psystem";
    m.n = 2;
    m.family = static_cast<int>(param(p, "family", 2));
    m.box = {{0.1, -10.0}, {10.0, 10.0}};
    m.flux = [gamma](const Vec& u) { return Vec{-u[1], std::pow(u[0], -gamma)}; };
    m.jacobian_fn = [gamma](const Vec& u) {
        Matrix j(2, 2);
        j(0, 1) = -1.0;
        j(1, 0) = -gamma * std::pow(u[0], -gamma - 1.0);
        return j;
    };
    m.eigenvalues_fn = [gamma](const Vec& u) {
        if (!(u[0] > 0)) throw Error(ErrorCode::NonHyperbolic, "psystem needs v > 0");
        const double c = std::sqrt(gamma * std::pow(u[0], -gamma - 1.0));
        return Vec{-c, c};
    };
    // w1 = u + h(v), w2 = u - h(v), h(v) = int_{v_ref}^v c.
    const double a = 0.5 * (gamma - 1.0);
    const double K = 2.0 * std::sqrt(gamma) / (gamma - 1.0);
    auto h = [=](double v) { return K * (std::pow(v_ref, -a) - std::pow(v, -a)); };
    CoordinateChart& c = b.chart;
    c.u_ref = {v_ref, u_ref};
    c.applicable_box = m.box;
    c.forward = [=](const Vec& s) {
        const double hv = h(s[0]);
        return Vec{(s[1] - u_ref) + hv, (s[1] - u_ref) - hv};
    };
    c.inverse = [=](const Vec& w) {
        const double hv = 0.5 * (w[0] - w[1]);
        const double base = std::pow(v_ref, -a) - hv / K;
        if (!(base > 0)) throw Error(ErrorCode::NonHyperbolic, "psystem chart: v out of range");
        return Vec{std::pow(base, -1.0 / a), u_ref + 0.5 * (w[0] + w[1])};
    };
    return b;
}

// Full Euler in conserved variables (rho, m, E), ideal gas.
ModelBundle make_euler3(const Params& p) {
    const double gamma = param(p, "gamma", 1.4);
    const double rho_ref = param(p, "rho", 1.0);
    const double u_ref = param(p, "u", 0.0);
    const double p_ref = param(p, "p", 1.0);
    if (!(gamma > 1.0) || !(rho_ref > 0) || !(p_ref > 0))
        throw Error(ErrorCode::BadParams, "euler3 needs gamma > 1, rho > 0, p > 0");
    ModelBundle b;
    SystemModel& m = b.model;
    m.name = "euler3";
    m.n = 3;
    m.family = static_cast<int>(param(p, "family", 3));
    m.box = {{0.05, -20.0, 0.01}, {20.0, 20.0, 200.0}};
    auto pressure = [gamma](const Vec& s) { return (gamma - 1.0) * (s[2] - 0.5 * s[1] * s[1] / s[0]); };
    m.flux = [=](const Vec& s) {
        const double vel = s[1] / s[0], pr = pressure(s);
        return Vec{s[1], s[1] * vel + pr, (s[2] + pr) * vel};
    };
    m.jacobian_fn = [=](const Vec& s) {
        const double vel = s[1] / s[0], E = s[2] / s[0], g1 = gamma - 1.0;
        Matrix j(3, 3);
        j(0, 1) = 1.0;
        j(1, 0) = 0.5 * (gamma - 3.0) * vel * vel;
        j(1, 1) = (3.0 - gamma) * vel;
        j(1, 2) = g1;
        j(2, 0) = vel * (g1 * vel * vel - gamma * E);
        j(2, 1) = gamma * E - 1.5 * g1 * vel * vel;
        j(2, 2) = gamma * vel;
        return j;
    };
    m.eigenvalues_fn = [=](const Vec& s) {
        const double pr = pressure(s);
        if (!(s[0] > 0) || !(pr > 0)) throw Error(ErrorCode::NonHyperbolic, "euler3 needs rho, p > 0");
        const double vel = s[1] / s[0], c = std::sqrt(gamma * pr / s[0]);
        return Vec{vel - c, vel, vel + c};
    };
    // Riemann-invariant chart with an entropy correction making A(0) diagonal:
    // w1 = du - 2dc/(g-1) + k ds, w2 = ds, w3 = du + 2dc/(g-1) - k ds.
    const double s_ref = std::log(p_ref) - gamma * std::log(rho_ref);
    const double c_ref = std::sqrt(gamma * p_ref / rho_ref);
    const double k = c_ref / (gamma * (gamma - 1.0));
    const double q = 2.0 / (gamma - 1.0);
    CoordinateChart& c = b.chart;
    const double E_ref = p_ref / (gamma - 1.0) + 0.5 * rho_ref * u_ref * u_ref;
    c.u_ref = {rho_ref, rho_ref * u_ref, E_ref};
    c.applicable_box = m.box;
    c.forward = [=](const Vec& s) {
        const double rho = s[0], vel = s[1] / s[0], pr = pressure(s);
        if (!(rho > 0) || !(pr > 0)) throw Error(ErrorCode::NonHyperbolic, "euler3 chart: rho, p > 0");
        const double cs = std::sqrt(gamma * pr / rho);
        const double ds = std::log(pr) - gamma * std::log(rho) - s_ref;
        const double du = vel - u_ref, dc = cs - c_ref;
        return Vec{du - q * dc + k * ds, ds, du + q * dc - k * ds};
    };
    c.inverse = [=](const Vec& w) {
        const double ds = w[1];
        const double du = 0.5 * (w[0] + w[2]);
        const double dc = (0.5 * (w[2] - w[0]) + k * ds) / q;
        const double cs = c_ref + dc;
        if (!(cs > 0)) throw Error(ErrorCode::NonHyperbolic, "euler3 chart: sound speed <= 0");
        const double sv = s_ref + ds;
        const double rho = std::pow(cs * cs / (gamma * std::exp(sv)), 1.0 / (gamma - 1.0));
        const double pr = std::exp(sv) * std::pow(rho, gamma);
        const double vel = u_ref + du;
        return Vec{rho, rho * vel, pr / (gamma - 1.0) + 0.5 * rho * vel * vel};
    };
    return b;
}

struct MhdParams {
    double rho, H1, H2, H3, S, gamma, A, cv;
};

MhdParams mhd_params(const Params& p) {
    MhdParams q{param(p, "rho", 1.0), param(p, "H1", 1.0), param(p, "H2", 1.0), param(p, "H3", 1.0),
                param(p, "S", 0.0),   param(p, "gamma", 5.0 / 3.0), param(p, "A", 1.0),
                param(p, "cv", 1.0)};
    if (!(q.rho > 0)) throw Error(ErrorCode::BadParams, "mhd7 needs rho > 0");
    if (q.H2 * q.H3 == 0.0) throw Error(ErrorCode::BadParams, "mhd7 needs H2*H3 != 0");
    if (!(q.H1 > 0)) throw Error(ErrorCode::BadParams, "mhd7 needs H1 > 0");
    if (!(q.gamma > 1) || !(q.A > 0) || !(q.cv > 0)) throw Error(ErrorCode::BadParams, "mhd7 needs gamma > 1, A, cv > 0");
    return q;
}

// 1-D ideal MHD with fixed normal field H1; conserved
// (rho, rho u1, rho u2, rho u3, H2, H3, rho S).
ModelBundle make_mhd7(const Params& p) {
    const MhdParams q = mhd_params(p);
    ModelBundle b;
    SystemModel& m = b.model;
    m.name = "mhd7";
    m.n = 7;
    m.family = static_cast<int>(param(p, "family", 7));
    const double hs = 10.0 * (1.0 + std::abs(q.H2) + std::abs(q.H3));
    m.box = {{0.2 * q.rho, -10, -10, -10, -hs, -hs, -50.0 * q.rho},
             {5.0 * q.rho, 10, 10, 10, hs, hs, 50.0 * q.rho}};
    auto pressure = [q](double rho, double S) { return q.A * std::pow(rho, q.gamma) * std::exp(S / q.cv); };
    m.flux = [=](const Vec& s) {
        const double rho = s[0], u1 = s[1] / rho, u2 = s[2] / rho, u3 = s[3] / rho;
        const double H2 = s[4], H3 = s[5], S = s[6] / rho;
        const double P = pressure(rho, S);
        return Vec{s[1],
                   s[1] * u1 + P + 0.5 * (H2 * H2 + H3 * H3),
                   s[1] * u2 - q.H1 * H2,
                   s[1] * u3 - q.H1 * H3,
                   u1 * H2 - q.H1 * u2,
                   u1 * H3 - q.H1 * u3,
                   s[1] * S};
    };
    m.jacobian_fn = [=](const Vec& s) {
        const double rho = s[0], u1 = s[1] / rho, u2 = s[2] / rho, u3 = s[3] / rho;
        const double H2 = s[4], H3 = s[5], S = s[6] / rho;
        const double P = pressure(rho, S);
        const double c2 = q.gamma * P / rho, PS = P / q.cv;
        Matrix j(7, 7);
        j(0, 1) = 1.0;
        j(1, 0) = -u1 * u1 + c2 - PS * S / rho;
        j(1, 1) = 2 * u1;
        j(1, 4) = H2;
        j(1, 5) = H3;
        j(1, 6) = PS / rho;
        j(2, 0) = -u1 * u2;
        j(2, 1) = u2;
        j(2, 2) = u1;
        j(2, 4) = -q.H1;
        j(3, 0) = -u1 * u3;
        j(3, 1) = u3;
        j(3, 3) = u1;
        j(3, 5) = -q.H1;
        j(4, 0) = (-u1 * H2 + q.H1 * u2) / rho;
        j(4, 1) = H2 / rho;
        j(4, 2) = -q.H1 / rho;
        j(4, 4) = u1;
        j(5, 0) = (-u1 * H3 + q.H1 * u3) / rho;
        j(5, 1) = H3 / rho;
        j(5, 3) = -q.H1 / rho;
        j(5, 5) = u1;
        j(6, 0) = -u1 * S;
        j(6, 1) = S;
        j(6, 6) = u1;
        return j;
    };
    const Vec u_ref{q.rho, 0, 0, 0, q.H2, q.H3, q.rho * q.S};
    // Linearized chart: w = L(u_ref) (u - u_ref), accurate to O(|w|^2).
    const EigenSystem es = eigensystem(m.jacobian_fn(u_ref), kTolDegenerate);
    const Matrix L = es.lefts, R = es.rights;
    CoordinateChart& c = b.chart;
    c.u_ref = u_ref;
    c.applicable_box = m.box;
    c.approximate = true;
    c.forward = [=](const Vec& s) { return L * (s - u_ref); };
    c.inverse = [=](const Vec& w) { return u_ref + R * w; };
    return b;
}

}  // namespace

Vec mhd_closed_form_eigenvalues(const Params& p) {
    const MhdParams q = mhd_params(p);
    const double c2 = q.gamma * q.A * std::pow(q.rho, q.gamma - 1.0) * std::exp(q.S / q.cv);
    const double H2sum = q.H1 * q.H1 + q.H2 * q.H2 + q.H3 * q.H3;
    const double b = H2sum / q.rho + c2;
    const double root = std::sqrt(b * b - 4.0 / q.rho * q.H1 * q.H1 * c2);
    const double l1 = -std::sqrt(0.5 * b + 0.5 * root);
    const double l2 = -q.H1 / std::sqrt(q.rho);
    const double l3 = -std::sqrt(0.5 * b - 0.5 * root);
    return {l1, l2, l3, 0.0, -l3, -l2, -l1};
}

std::vector<std::string> builtin_names() {
    return {"burgers", "psystem", "euler3", "mhd7", "linear_diag"};
}

ModelBundle builtin(const std::string& name, const Params& params) {
    ModelBundle b;
    if (name == "burgers") b = make_burgers(params);
    else if (name == "psystem") b = make_psystem(params);
    else if (name == "euler3") b = make_euler3(params);
    else if (name == "mhd7") b = make_mhd7(params);
    else if (name == "linear_diag") b = make_linear_diag(params);
    else throw Error(ErrorCode::UnknownModel, name);
    if (b.model.family < 1 || b.model.family > b.model.n)
        throw Error(ErrorCode::BadParams, "family out of range");
    return b;
}

namespace {

struct Monomial {
    double coef;
    std::vector<int> powers;
};

double eval_monomial(const Monomial& mono, const Vec& u) {
    double v = mono.coef;
    for (std::size_t k = 0; k < mono.powers.size(); ++k)
        if (mono.powers[k] != 0) v *= std::pow(u[k], mono.powers[k]);
    return v;
}

}  // namespace

ModelBundle load_manifest_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("manifest parse: ") + e.what());
    }
    if (j.contains("builtin")) {
        Params params;
        if (j.contains("params"))
            for (auto& [key, val] : j["params"].items()) params[key] = val.get<double>();
        if (j.contains("family")) params["family"] = j["family"].get<double>();
        return builtin(j["builtin"].get<std::string>(), params);
    }
    try {
        ModelBundle b;
        SystemModel& m = b.model;
        m.name = j.value("name", std::string("polynomial"));
        m.n = j.at("n").get<int>();
        m.family = j.at("family").get<int>();
        m.box.lo = j.at("box").at("lo").get<Vec>();
        m.box.hi = j.at("box").at("hi").get<Vec>();
        const std::size_t n = static_cast<std::size_t>(m.n);
        if (m.family < 1 || m.family > m.n || m.box.lo.size() != n || m.box.hi.size() != n)
            throw Error(ErrorCode::BadParams, "manifest dimensions");
        std::vector<std::vector<Monomial>> rows;
        for (const auto& row : j.at("flux")) {
            std::vector<Monomial> terms;
            for (const auto& t : row) {
                Monomial mono{t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()};
                if (mono.powers.size() != n) throw Error(ErrorCode::BadParams, "monomial arity");
                terms.push_back(mono);
            }
            rows.push_back(terms);
        }
        if (rows.size() != n) throw Error(ErrorCode::BadParams, "flux rows");
        m.flux = [rows](const Vec& u) {
            Vec f(rows.size(), 0.0);
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (const auto& mono : rows[i]) f[i] += eval_monomial(mono, u);
            return f;
        };
        m.jacobian_fn = [rows, n](const Vec& u) {
            Matrix jac(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (const auto& mono : rows[i])
                    for (std::size_t k = 0; k < n; ++k) {
                        if (mono.powers[k] == 0) continue;
                        Monomial d = mono;
                        d.coef *= mono.powers[k];
                        d.powers[k] -= 1;
                        jac(i, k) += eval_monomial(d, u);
                    }
            return jac;
        };
        Vec u_ref = j.contains("u_ref") ? j["u_ref"].get<Vec>() : m.box.center();
        b.chart = shift_chart(u_ref, m.box);
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("manifest: ") + e.what());
    }
}

ModelBundle load_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read manifest " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_manifest_text(ss.str());
}

SystemModel shifted_model(const SystemModel& base, double shift, double scale) {
    SystemModel m = base;
    m.flux = [base, shift, scale](const Vec& u) {
        Vec f = base.flux(u);
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = (f[k] - shift * u[k]) / scale;
        return f;
    };
    m.jacobian_fn = [base, shift, scale](const Vec& u) {
        Matrix j = base.jacobian(u);
        for (std::size_t k = 0; k < j.rows(); ++k) j(k, k) -= shift;
        return (1.0 / scale) * j;
    };
    if (base.eigenvalues_fn) {
        m.eigenvalues_fn = [base, shift, scale](const Vec& u) {
            Vec lam = base.eigenvalues_fn(u);
            for (double& l : lam) l = (l - shift) / scale;
            if (scale < 0) std::reverse(lam.begin(), lam.end());
            return lam;
        };
    }
    return m;
}

CoordinateChart rescaled_chart(const CoordinateChart& base, const Vec& w_star, double s_w) {
    CoordinateChart c = base;
    c.u_ref = base.inverse(w_star);
    c.trivial = false;
    c.forward = [base, w_star, s_w](const Vec& u) { return (1.0 / s_w) * (base.forward(u) - w_star); };
    c.inverse = [base, w_star, s_w](const Vec& w) { return base.inverse(w_star + s_w * w); };
    return c;
}

}  // namespace charfront
