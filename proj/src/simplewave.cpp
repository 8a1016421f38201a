#include "charfront/simplewave.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <cmath>
#include <limits>

#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"

namespace charfront {

namespace {

// Truncated Taylor series c0 + c1 d + ... + c4 d^4.
struct Jet {
    std::array<double, 5> c{};
    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    static Jet variable(double v) {
        Jet j;
        j.c[0] = v;
        j.c[1] = 1.0;
        return j;
    }
    double derivative(int k) const {
        static const double fact[5] = {1, 1, 2, 6, 24};
        return c[static_cast<std::size_t>(k)] * fact[k];
    }
};

Jet operator+(Jet a, const Jet& b) {
    for (std::size_t k = 0; k < 5; ++k) a.c[k] += b.c[k];
    return a;
}
Jet operator-(Jet a, const Jet& b) {
    for (std::size_t k = 0; k < 5; ++k) a.c[k] -= b.c[k];
    return a;
}
Jet operator*(double s, Jet a) {
    for (double& x : a.c) x *= s;
    return a;
}
Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t j = 0; j <= k; ++j) r.c[k] += a.c[j] * b.c[k - j];
    return r;
}
Jet operator/(const Jet& a, const Jet& b) {
    Jet q;
    for (std::size_t k = 0; k < 5; ++k) {
        double s = a.c[k];
        for (std::size_t j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
        q.c[k] = s / b.c[0];
    }
    return q;
}
Jet exp(const Jet& f) {
    Jet y;
    y.c[0] = std::exp(f.c[0]);
    for (std::size_t k = 1; k < 5; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * f.c[j] * y.c[k - j];
        y.c[k] = s / static_cast<double>(k);
    }
    return y;
}

// exp(-1/s) for s > 0, 0 otherwise.
Jet flat(const Jet& s) {
    if (s.c[0] <= 0.0) return Jet{};
    return exp(-1.0 * (Jet::constant(1.0) / s));
}

class PolyBump final : public Profile {
public:
    PolyBump(Vec coeffs, double plateau, double radius)
        : coeffs_(std::move(coeffs)), r_(plateau), R_(radius) {}

    double eval(double x, int k) const override {
        const Jet X = Jet::variable(x);
        Jet poly;
        for (std::size_t m = coeffs_.size(); m-- > 0;) poly = poly * X + Jet::constant(coeffs_[m]);
        if (R_ <= 0.0 || std::abs(x) <= r_) return poly.derivative(k);
        if (std::abs(x) >= R_) return 0.0;
        const Jet ax = x < 0 ? -1.0 * X : X;
        const Jet s = (1.0 / (R_ - r_)) * (Jet::constant(R_) - ax);
        const Jet e1 = flat(s), e2 = flat(Jet::constant(1.0) - s);
        return (poly * (e1 / (e1 + e2))).derivative(k);
    }

private:
    Vec coeffs_;
    double r_, R_;
};

class Tabulated final : public Profile {
public:
    Tabulated(Vec samples, double x0, double h)
        : spline_(samples, x0, h), x0_(x0), x1_(x0 + h * static_cast<double>(samples.size() - 1)),
          h_(h), y0_(samples.front()), y1_(samples.back()) {}

    double eval(double x, int k) const override {
        if (x <= x0_) return k == 0 ? y0_ : 0.0;
        if (x >= x1_) return k == 0 ? y1_ : 0.0;
        switch (k) {
            case 0: return spline_(x);
            case 1: return spline_.prime(x);
            case 2: return spline_.double_prime(x);
            default: {
                const double d = 1e-3 * h_;
                const double a = spline_.double_prime(std::max(x - d, x0_));
                const double b = spline_.double_prime(std::min(x + d, x1_));
                if (k == 3) return (b - a) / (2 * d);
                return (b - 2 * spline_.double_prime(x) + a) / (d * d);
            }
        }
    }

private:
    boost::math::interpolators::cardinal_quintic_b_spline<double> spline_;
    double x0_, x1_, h_, y0_, y1_;
};

class Affine final : public Profile {
public:
    Affine(ProfilePtr base, double x0, double L, double offset, double scale)
        : base_(std::move(base)), x0_(x0), L_(L), offset_(offset), scale_(scale) {}

    double eval(double y, int k) const override {
        const double v = base_->eval(x0_ + L_ * y, k);
        if (k == 0) return (v - offset_) / scale_;
        return std::pow(L_, k) * v / scale_;
    }

private:
    ProfilePtr base_;
    double x0_, L_, offset_, scale_;
};

}  // namespace

ProfilePtr poly_bump_profile(Vec coeffs, double plateau, double radius) {
    return std::make_shared<PolyBump>(std::move(coeffs), plateau, radius);
}

ProfilePtr tabulated_profile(Vec samples, double x0, double h) {
    return std::make_shared<Tabulated>(std::move(samples), x0, h);
}

ProfilePtr affine_profile(ProfilePtr base, double x0, double L, double offset, double scale) {
    return std::make_shared<Affine>(std::move(base), x0, L, offset, scale);
}

Vec SimpleWaveData::wbar(double wi) const {
    Vec w(static_cast<std::size_t>(model.n), 0.0);
    w[static_cast<std::size_t>(model.index())] = wi;
    return w;
}

Vec SimpleWaveData::state(double x) const { return chart.inverse(wbar(w_i0->eval(x, 0))); }

double SimpleWaveData::axis_speed(double wi) const {
    return model.eigenvalues(chart.inverse(wbar(wi)))[static_cast<std::size_t>(model.index())];
}

std::array<double, 4> SimpleWaveData::axis_speed_derivatives(double wi) const {
    auto f = [&](double d) { return axis_speed(wi + d); };
    std::array<double, 4> out{};
    const double h = 1e-3;
    const double f0 = f(0), fp1 = f(h), fm1 = f(-h), fp2 = f(2 * h), fm2 = f(-2 * h);
    out[0] = f0;
    out[1] = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h);
    out[2] = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
    const double H = 1e-2;
    out[3] = (-f(3 * H) + 8 * f(2 * H) - 13 * f(H) + 13 * f(-H) - 8 * f(-2 * H) + f(-3 * H)) /
             (8 * H * H * H);
    return out;
}

double SimpleWaveData::G(double x) const { return axis_speed(w_i0->eval(x, 0)); }

std::array<double, 4> SimpleWaveData::G_derivatives(double x) const {
    const double w0 = w_i0->eval(x, 0), w1 = w_i0->eval(x, 1), w2 = w_i0->eval(x, 2),
                 w3 = w_i0->eval(x, 3);
    const auto L = axis_speed_derivatives(w0);
    return {L[0], L[1] * w1, L[2] * w1 * w1 + L[1] * w2,
            L[3] * w1 * w1 * w1 + 3 * L[2] * w1 * w2 + L[1] * w3};
}

double characteristic_map(const SimpleWaveData& data, double beta, double t) {
    return beta + (t + 1.0) * data.G(beta);
}

BlowupReport find_blowup(const SimpleWaveData& data, std::size_t scan_points, double tol_x) {
    const double a = data.support_lo, b = data.support_hi;
    auto Gp = [&](double x) { return data.G_derivatives(x)[1]; };
    const Vec xs = linspace(a, b, scan_points);
    Vec gp(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) gp[k] = Gp(xs[k]);
    const std::size_t kmin =
        static_cast<std::size_t>(std::min_element(gp.begin(), gp.end()) - gp.begin());
    BlowupReport rep;
    if (!(gp[kmin] < 0.0)) throw Error(ErrorCode::NoBlowup, "G' >= 0 on the support");
    // Other grid-local minima at the same depth make the minimizer non-unique.
    const double depth = gp[kmin];
    const double spacing = (b - a) / static_cast<double>(scan_points - 1);
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
        if (gp[k] <= gp[k - 1] && gp[k] <= gp[k + 1] && std::abs(xs[k] - xs[kmin]) > 4 * spacing &&
            gp[k] <= depth + 1e-9 * std::abs(depth)) {
            rep.unique = false;
            rep.warnings.push_back("G' minimum is not unique");
            break;
        }
    }
    const double lo = xs[kmin > 0 ? kmin - 1 : 0];
    const double hi = xs[std::min(kmin + 1, xs.size() - 1)];
    double x = golden_section_min(Gp, lo, hi, tol_x);
    // The minimum is flat to round-off near x; finish on G'' = 0.
    for (int it = 0; it < 8; ++it) {
        const auto d = data.G_derivatives(x);
        if (!(d[3] > 0)) break;
        const double step = d[2] / d[3];
        const double next = std::clamp(x - step, lo, hi);
        if (std::abs(next - x) <= tol_x) {
            x = next;
            break;
        }
        x = next;
    }
    const auto d = data.G_derivatives(x);
    rep.beta_star = x;
    rep.Gp_min = d[1];
    rep.Gpp = d[2];
    rep.Gppp = d[3];
    rep.T_star = -1.0 - 1.0 / rep.Gp_min;
    rep.x_star = characteristic_map(data, x, rep.T_star);
    rep.nondegenerate = rep.unique && std::abs(rep.Gpp) <= kTolND && rep.Gppp > kTolND;
    if (!rep.nondegenerate) rep.warnings.push_back("Degenerate: blowup is not generic");
    return rep;
}

bool AffineMap::is_identity(double tol) const {
    bool ok = std::abs(t_star) <= tol && std::abs(x_star) <= tol && std::abs(lambda0) <= tol &&
              std::abs(g - 1) <= tol && std::abs(L - 1) <= tol && std::abs(s_w - 1) <= tol;
    for (double w : w_star) ok = ok && std::abs(w) <= tol;
    return ok;
}

NormalizedWave normalize(const SimpleWaveData& data, const BlowupReport& report) {
    if (!report.nondegenerate) throw Error(ErrorCode::Degenerate, "normalize needs a generic blowup");
    NormalizedWave out;
    AffineMap& m = out.map;
    const double beta = report.beta_star;
    const double wstar = data.w_i0->eval(beta, 0);
    const auto Ld = data.axis_speed_derivatives(wstar);
    if (Ld[1] == 0.0) throw Error(ErrorCode::Degenerate, "family is not genuinely nonlinear at blowup");
    m.t_star = report.T_star;
    m.x_star = report.x_star;
    m.lambda0 = data.G(beta);
    m.g = -report.Gp_min;
    m.L = std::sqrt(6.0 * m.g / report.Gppp);
    m.s_w = m.L * m.g / Ld[1];
    m.w_star = data.wbar(wstar);
    SimpleWaveData& nd = out.data;
    nd.model = shifted_model(data.model, m.lambda0, m.L * m.g);
    nd.chart = rescaled_chart(data.chart, m.w_star, m.s_w);
    nd.w_i0 = affine_profile(data.w_i0, beta, m.L, wstar, m.s_w);
    nd.support_lo = (data.support_lo - beta) / m.L;
    nd.support_hi = (data.support_hi - beta) / m.L;
    if (m.L < 0) std::swap(nd.support_lo, nd.support_hi);
    return out;
}

PreblowupValue evaluate_preblowup(const SimpleWaveData& data, const BlowupReport& report, double x,
                                  double t) {
    if (!(t < report.T_star) || t < -1.0)
        throw Error(ErrorCode::NotInvertible, "characteristic map is not invertible at this time");
    auto eta = [&](double b) { return characteristic_map(data, b, t) - x; };
    auto deta = [&](double b) { return 1.0 + (t + 1.0) * data.G_derivatives(b)[1]; };
    double lo = x, hi = x, step = 1e-3 + 0.1 * (data.support_hi - data.support_lo);
    while (eta(lo) > 0) lo -= step, step *= 2;
    step = 1e-3 + 0.1 * (data.support_hi - data.support_lo);
    while (eta(hi) < 0) hi += step, step *= 2;
    PreblowupValue v;
    v.beta = bracketed_root(eta, deta, lo, hi, 1e-15);
    v.w_i = data.w_i0->eval(v.beta, 0);
    v.u = data.chart.inverse(data.wbar(v.w_i));
    return v;
}

PreblowupValue evaluate_preblowup(const SimpleWaveData& data, double x, double t) {
    const Vec xs = linspace(data.support_lo, data.support_hi, 2001);
    double gmin = 0.0;
    for (double s : xs) gmin = std::min(gmin, data.G_derivatives(s)[1]);
    BlowupReport rep;
    rep.T_star = gmin < 0 ? -1.0 - 1.0 / gmin : std::numeric_limits<double>::infinity();
    return evaluate_preblowup(data, rep, x, t);
}

SimpleWaveData burgers_cubic_wave(double plateau, double radius) {
    const ModelBundle b = builtin("burgers");
    SimpleWaveData d;
    d.model = b.model;
    d.chart = b.chart;
    d.w_i0 = poly_bump_profile({0.0, -1.0, 0.0, 1.0}, plateau, radius);
    d.support_lo = -radius;
    d.support_hi = radius;
    return d;
}

}  // namespace charfront
