#include "charfront/preshock.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"

namespace charfront {

namespace {

// eta(beta, 0) = beta + G(beta) of a normalized simple wave.
class WaveEta final : public Profile {
public:
    explicit WaveEta(SimpleWaveData data) : data_(std::move(data)) {}
    double eval(double b, int k) const override {
        if (k == 4) {
            const double h = 1e-3;
            return (data_.G_derivatives(b + h)[3] - data_.G_derivatives(b - h)[3]) / (2 * h);
        }
        const auto d = data_.G_derivatives(b);
        switch (k) {
            case 0: return b + d[0];
            case 1: return 1.0 + d[1];
            default: return d[static_cast<std::size_t>(k)];
        }
    }

private:
    SimpleWaveData data_;
};

double fourth_difference(const Profile& f, double h) {
    return (f(-2 * h) - 4 * f(-h) + 6 * f(0.0) - 4 * f(h) + f(2 * h)) / (h * h * h * h);
}

}  // namespace

std::pair<double, double> invert_eta0(double eta4) {
    const double c = eta4 / 24.0;
    return {-c / 3.0, c * c / 3.0};
}

PreshockProfile expand_preshock(ProfilePtr w0, ProfilePtr eta, double x_max) {
    const double tol = 1e-6;
    if (std::abs(eta->eval(0, 0)) > tol || std::abs(eta->eval(0, 1)) > tol ||
        std::abs(eta->eval(0, 2)) > tol || std::abs(eta->eval(0, 3) - 6.0) > 1e-4 ||
        std::abs(w0->eval(0, 0)) > tol || std::abs(w0->eval(0, 1) + 1.0) > 1e-4)
        throw Error(ErrorCode::Degenerate, "pre-shock data is not normalized at the blowup point");
    PreshockProfile p;
    p.w0 = std::move(w0);
    p.eta = std::move(eta);
    p.x_max = x_max;
    p.eta4 = fourth_difference(*p.eta, 1e-3);
    std::tie(p.alpha2, p.alpha3) = invert_eta0(p.eta4);
    p.w0pp = p.w0->eval(0, 2);
    p.w0ppp = p.w0->eval(0, 3);
    p.a2 = -p.alpha2 + 0.5 * p.w0pp;
    p.a3 = -p.alpha3 + p.alpha2 * p.w0pp + p.w0ppp / 6.0;
    return p;
}

PreshockProfile expand_preshock(const SimpleWaveData& data) {
    const double radius = std::min(std::abs(data.support_lo), std::abs(data.support_hi));
    return expand_preshock(data.w_i0, std::make_shared<WaveEta>(data), std::min(radius, 0.1));
}

double PreshockProfile::label(double x) const {
    if (x == 0.0) return 0.0;
    const double s = std::cbrt(x);
    const double seed = std::abs(x) <= x_max ? s + alpha2 * s * s + alpha3 * x : s;
    auto f = [&](double b) { return eta->eval(b, 0) - x; };
    double delta = 0.05 * std::abs(seed) + 1e-300;
    double lo = seed - delta, hi = seed + delta;
    for (int it = 0; it < 200 && f(lo) > 0; ++it) lo -= (delta *= 2);
    for (int it = 0; it < 200 && f(hi) < 0; ++it) hi += (delta *= 2);
    while (hi - lo > 1e-3 * std::abs(seed) && hi - lo > 1e-300) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > 0) hi = mid;
        else lo = mid;
    }
    double b = 0.5 * (lo + hi);
    const double slack = hi - lo;
    for (int it = 0; it < 3; ++it) {
        const double d = eta->eval(b, 1);
        if (!(d > 0)) break;
        const double next = b - f(b) / d;
        if (!(next >= lo - slack && next <= hi + slack)) break;
        b = next;
    }
    return b;
}

double PreshockProfile::sampler(double x) const { return w0->eval(label(x), 0); }

PreshockDerivatives PreshockProfile::derivatives(double x) const {
    PreshockDerivatives d;
    d.beta = label(x);
    const double b = d.beta;
    const double e1 = eta->eval(b, 1), e2 = eta->eval(b, 2), e3 = eta->eval(b, 3);
    d.w = w0->eval(b, 0);
    d.w1 = w0->eval(b, 1) / e1;
    d.w2 = (w0->eval(b, 2) - d.w1 * e2) / (e1 * e1);
    d.w3 = (w0->eval(b, 3) - d.w1 * e3 - 3 * d.w2 * e1 * e2) / (e1 * e1 * e1);
    return d;
}

double PreshockProfile::series(double x) const {
    const double s = std::cbrt(x);
    return -s + a2 * s * s + a3 * x;
}

Vec envelope_grid(double lo, double hi, std::size_t per_side) {
    const Vec pos = geomspace(lo, hi, per_side);
    Vec g;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    for (double x : pos) g.push_back(x);
    return g;
}

EnvelopeReport validate_envelopes(const PreshockProfile& p, const Vec& x_grid) {
    const char* ids[5] = {"preshock_value", "preshock_two_term", "preshock_slope", "preshock_curvature", "preshock_third"};
    std::vector<Vec> ratio(5), rel(5);
    Vec ax;
    Vec hx, hw;
    for (double x : x_grid) {
        if (x == 0.0) continue;
        const double a = std::abs(x), s = std::cbrt(x);
        const PreshockDerivatives d = p.derivatives(x);
        ax.push_back(a);
        const double r01 = std::abs(d.w + s - p.a2 * s * s);
        const double r1 = std::abs(d.w1 + 1.0 / (3 * s * s) - 2.0 * p.a2 / (3 * s));
        const double r2 = std::abs(d.w2 - 2.0 / (9 * s * s * s * s * s));
        ratio[0].push_back(std::abs(d.w));
        ratio[1].push_back(r01 / a);
        ratio[2].push_back(r1);
        ratio[3].push_back(r2 / std::pow(a, -4.0 / 3.0));
        ratio[4].push_back(std::abs(d.w3) / std::pow(a, -8.0 / 3.0));
        // residual relative to the leading term it is taken from
        rel[0].push_back(1.0);
        rel[1].push_back(r01 / std::abs(s));
        rel[2].push_back(r1 * 3 * s * s);
        rel[3].push_back(r2 * 4.5 * std::pow(a, 5.0 / 3.0));
        rel[4].push_back(1.0);
        if (x >= 1e-8 && x <= 1e-3) hx.push_back(x), hw.push_back(d.w);
    }
    EnvelopeReport rep;
    const double amin = ax.empty() ? 0.0 : *std::min_element(ax.begin(), ax.end());
    for (std::size_t b = 0; b < 5; ++b) {
        EnvelopeBound eb;
        eb.id = ids[b];
        Vec inner_x, inner_r;
        for (std::size_t k = 0; k < ax.size(); ++k) {
            eb.constant = std::max(eb.constant, ratio[b][k]);
            // residuals at rounding level carry no growth information
            if (ax[k] <= 100 * amin && rel[b][k] > 1e-7) inner_x.push_back(ax[k]), inner_r.push_back(ratio[b][k]);
        }
        const LinearFit fit = loglog_fit(inner_x, inner_r);
        eb.growth_slope = fit.slope;
        eb.bounded = !(fit.count >= 4 && fit.slope < -0.15 && fit.r2 > 0.8);
        rep.M_env = std::max(rep.M_env, eb.constant);
        rep.bounds.push_back(eb);
    }
    const LinearFit h = loglog_fit(hx, hw);
    rep.holder_slope = h.slope;
    rep.holder_r2 = h.r2;
    for (const auto& eb : rep.bounds)
        if (!eb.bounded)
            throw Error(ErrorCode::EnvelopeViolation,
                        eb.id + " ratio grows toward x = 0 (slope " + std::to_string(eb.growth_slope) + ")");
    return rep;
}

}  // namespace charfront
