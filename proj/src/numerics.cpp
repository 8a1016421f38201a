#include "charfront/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace charfront {

LinearFit linear_fit(const Vec& x, const Vec& y) {
    LinearFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    fit.count = n;
    if (n < 2) return fit;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

LinearFit loglog_fit(const Vec& x, const Vec& y) {
    Vec lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        const double ax = std::abs(x[i]), ay = std::abs(y[i]);
        if (ax > 0 && ay > 0 && std::isfinite(ax) && std::isfinite(ay)) {
            lx.push_back(std::log(ax));
            ly.push_back(std::log(ay));
        }
    }
    return linear_fit(lx, ly);
}

Vec linspace(double a, double b, std::size_t n) {
    Vec v(n);
    if (n == 1) return {a};
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

Vec geomspace(double a, double b, std::size_t n) {
    Vec v = linspace(std::log(a), std::log(b), n);
    for (double& x : v) x = std::exp(x);
    if (n > 0) v.front() = a, v.back() = b;
    return v;
}

double bracketed_root(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double a, double b,
                      double xtol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0) throw std::domain_error("bracketed_root: no sign change");
    if (a > b) std::swap(a, b), std::swap(fa, fb);
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0) == (fa < 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        double next = 0.5 * (a + b);
        if (df) {
            const double d = df(x);
            if (d != 0.0 && std::isfinite(d)) {
                const double cand = x - fx / d;
                if (cand > a && cand < b) next = cand;
            }
        }
        if (std::abs(next - x) <= xtol * (1.0 + std::abs(x)) || b - a <= xtol * (1.0 + std::abs(x)))
            return next;
        x = next;
    }
    return x;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (c >= d) break;
    }
    return 0.5 * (a + b);
}

namespace {

template <int Q>
QuadratureRule make_rule() {
    using G = boost::math::quadrature::gauss<double, Q>;
    QuadratureRule r;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = xs[k], w = ws[k];
        if (x == 0.0) {
            r.nodes.push_back(0.5);
            r.weights.push_back(0.5 * w);
        } else {
            r.nodes.push_back(0.5 * (1.0 - x));
            r.weights.push_back(0.5 * w);
            r.nodes.push_back(0.5 * (1.0 + x));
            r.weights.push_back(0.5 * w);
        }
    }
    return r;
}

}  // namespace

const QuadratureRule& gauss_legendre_unit(int q) {
    static const QuadratureRule r5 = make_rule<5>();
    static const QuadratureRule r8 = make_rule<8>();
    static const QuadratureRule r16 = make_rule<16>();
    switch (q) {
        case 5: return r5;
        case 8: return r8;
        case 16: return r16;
        default: throw std::invalid_argument("gauss_legendre_unit: supported orders 5, 8, 16");
    }
}

void pchip_slopes(const double* x, const double* y, std::size_t n, double* d,
                  std::size_t stride) {
    auto Y = [&](std::size_t k) { return y[k * stride]; };
    auto D = [&](std::size_t k) -> double& { return d[k * stride]; };
    if (n < 2) {
        if (n == 1) D(0) = 0.0;
        return;
    }
    if (n == 2) {
        D(0) = D(1) = (Y(1) - Y(0)) / (x[1] - x[0]);
        return;
    }
    auto delta = [&](std::size_t k) { return (Y(k + 1) - Y(k)) / (x[k + 1] - x[k]); };
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double d0 = delta(k - 1), d1 = delta(k);
        if (d0 * d1 <= 0) {
            D(k) = 0.0;
        } else {
            const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
            const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
            D(k) = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    auto endpoint = [&](double h0, double h1, double del0, double del1) {
        double dd = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (dd * del0 <= 0) dd = 0.0;
        else if (del0 * del1 <= 0 && std::abs(dd) > std::abs(3 * del0)) dd = 3 * del0;
        return dd;
    };
    D(0) = endpoint(x[1] - x[0], x[2] - x[1], delta(0), delta(1));
    D(n - 1) = endpoint(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], delta(n - 2), delta(n - 3));
}

std::size_t locate(const double* x, std::size_t n, double xq) {
    if (xq <= x[0]) return 0;
    if (xq >= x[n - 1]) return n - 2;
    const double* it = std::upper_bound(x, x + n, xq);
    std::size_t k = static_cast<std::size_t>(it - x);
    return k == 0 ? 0 : std::min(k - 1, n - 2);
}

Pchip::Pchip(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)), d_(x_.size()) {
    if (x_.size() != y_.size() || x_.size() < 2)
        throw std::invalid_argument("Pchip: need at least two knots");
    pchip_slopes(x_.data(), y_.data(), x_.size(), d_.data());
}

double Pchip::operator()(double xq) const {
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    const std::size_t k = locate(x_.data(), x_.size(), xq);
    return hermite_eval(x_[k], x_[k + 1], y_[k], y_[k + 1], d_[k], d_[k + 1], xq);
}

double Pchip::derivative(double xq) const {
    if (xq <= x_.front() || xq >= x_.back()) return 0.0;
    const std::size_t k = locate(x_.data(), x_.size(), xq);
    const double h = x_[k + 1] - x_[k];
    const double s = (xq - x_[k]) / h;
    const double y0 = y_[k], y1 = y_[k + 1], d0 = d_[k], d1 = d_[k + 1];
    return ((6 * s * s - 6 * s) * y0 + (3 * s * s - 4 * s + 1) * h * d0 +
            (-6 * s * s + 6 * s) * y1 + (3 * s * s - 2 * s) * h * d1) /
           h;
}

Vec gradient(const Vec& t, const Vec& y) {
    const std::size_t n = t.size();
    Vec d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (y[1] - y[0]) / (t[1] - t[0]);
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h0 = t[k] - t[k - 1], h1 = t[k + 1] - t[k];
        d[k] = (h0 * h0 * y[k + 1] - h1 * h1 * y[k - 1] + (h1 * h1 - h0 * h0) * y[k]) /
               (h0 * h1 * (h0 + h1));
    }
    auto edge = [&](std::size_t a, std::size_t b, std::size_t c) {
        const double h0 = t[b] - t[a], h1 = t[c] - t[b];
        return (-(2 * h0 + h1) / (h0 * (h0 + h1))) * y[a] + ((h0 + h1) / (h0 * h1)) * y[b] -
               (h0 / (h1 * (h0 + h1))) * y[c];
    };
    d[0] = edge(0, 1, 2);
    const double h0 = t[n - 1] - t[n - 2], h1 = t[n - 2] - t[n - 3];
    d[n - 1] = ((2 * h0 + h1) / (h0 * (h0 + h1))) * y[n - 1] - ((h0 + h1) / (h0 * h1)) * y[n - 2] +
               (h0 / (h1 * (h0 + h1))) * y[n - 3];
    return d;
}

Vec cumulative_trapezoid(const Vec& t, const Vec& f) {
    Vec out(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k)
        out[k] = out[k - 1] + 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1]);
    return out;
}

}  // namespace charfront
