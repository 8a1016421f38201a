#include "charfront/shockfit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include <boost/math/tools/roots.hpp>

#include "charfront/errors.hpp"

namespace charfront {

namespace {

double sup_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Six-point Lagrange interpolation on the nodes around xq (fewer when short).
double local_lagrange(const Vec& x, const Vec& y, double xq) {
    const std::size_t n = x.size();
    if (n == 1) return y[0];
    const std::size_t width = std::min<std::size_t>(6, n);
    const std::size_t j = locate(x.data(), n, xq);
    std::size_t lo = j >= width / 2 - 1 ? j - (width / 2 - 1) : 0;
    lo = std::min(lo, n - width);
    double sum = 0.0;
    for (std::size_t a = lo; a < lo + width; ++a) {
        double basis = 1.0;
        for (std::size_t b = lo; b < lo + width; ++b)
            if (b != a) basis *= (xq - x[b]) / (x[a] - x[b]);
        sum += basis * y[a];
    }
    return sum;
}

Vec axis_state(const CoordinateChart& chart, std::size_t n, std::size_t i, double wi) {
    Vec w(n, 0.0);
    w[i] = wi;
    return chart.inverse(w);
}

// Runs body(k) for k in [0, count), in parallel when asked; the first
// exception thrown by any iteration is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t count, bool parallel, F&& body) {
    std::exception_ptr failure;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long k = 0; k < static_cast<long long>(count); ++k) {
        try {
            body(static_cast<std::size_t>(k));
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

class InnerSolver {
public:
    InnerSolver(const SystemModel& model, const CoordinateChart& chart,
                const PreshockProfile& profile, const ShockCurve& curve, const ShockControls& c)
        : model_(model), chart_(chart), prof_(profile), curve_(curve), c_(c) {
        n_ = static_cast<std::size_t>(model.n);
        fam_ = static_cast<std::size_t>(model.index());
        nc_ = n_ + n_ * n_;
        t_ = curve.times;
        K1_ = t_.size();
        const double eps = t_.back();
        hmax_ = eps / 8.0;

        const Vec lam0 = model.eigenvalues(chart.inverse(Vec(n_, 0.0)));
        double spread = 0.0;
        for (double l : lam0) spread = std::max(spread, std::abs(l - lam0[fam_]));
        double zmax = c.z_max > 0 ? c.z_max : std::max(3.0 * (spread + 1.0) * eps, 20 * std::pow(eps, 1.5));
        const double zmin = c.z_min_factor * std::pow(eps, 1.5);
        zk_.push_back(0.0);
        for (double z = zmin; z < zmax * c.z_ratio; z *= c.z_ratio) zk_.push_back(z);
        N1_ = zk_.size();

        double reach = 0.0;
        for (double x : {-1.3 * zmax, 1.3 * zmax})
            reach = std::max(reach, std::abs(model.lambda(axis_state(chart, n_, fam_, prof_.sampler(x)),
                                                          model.family)));
        const double bmax = 1.3 * zmax + 2 * eps * (1.0 + reach);
        const double bmin = 0.3 * std::pow(t_[1], 1.5);
        for (double b = bmin; b < bmax * c.label_ratio; b *= c.label_ratio) labels_.push_back(b);
    }

    std::size_t n() const { return n_; }

    // Field values on knots (zk_, knot 0 = one-sided trace) for every level.
    struct Iterate {
        std::array<Vec, 2> v;
        Vec sigma_rh;
        std::array<Vec, 2> beta;
        double slope_min = 0.0, slope_max = 0.0;
    };

    // Interpolant of an iterate: monotone cubic in z, linear in t.
    struct View {
        const InnerSolver* S = nullptr;
        bool zero = false;
        std::array<Vec, 2> v, dv, coef, dcoef;
    };

    struct Loc {
        std::size_t k, a;
        double th, z;
    };

    Loc where(double z, double s) const {
        Loc L{};
        L.z = std::clamp(z, 0.0, zk_.back());
        L.a = locate(zk_.data(), N1_, L.z);
        if (s >= t_.back()) {
            L.k = K1_ - 1;
            L.th = 0.0;
        } else if (s <= 0.0) {
            L.k = 0;
            L.th = 0.0;
        } else {
            L.k = locate(t_.data(), K1_, s);
            L.th = (s - t_[L.k]) / (t_[L.k + 1] - t_[L.k]);
        }
        return L;
    }

    double interp(const Vec& v, const Vec& d, std::size_t stride, std::size_t q, const Loc& L) const {
        auto level = [&](std::size_t k) {
            const std::size_t i0 = (k * N1_ + L.a) * stride + q, i1 = i0 + stride;
            return hermite_eval(zk_[L.a], zk_[L.a + 1], v[i0], v[i1], d[i0], d[i1], L.z);
        };
        const double r = level(L.k);
        if (L.th == 0.0) return r;
        return (1.0 - L.th) * r + L.th * level(L.k + 1);
    }

    double view_w(const View& V, int side, std::size_t c, const Loc& L) const {
        if (V.zero) return 0.0;
        return interp(V.v[side], V.dv[side], n_, c, L);
    }
    double view_lambda(const View& V, int side, std::size_t k, const Loc& L) const {
        return interp(V.coef[side], V.dcoef[side], nc_, k, L);
    }
    double view_p(const View& V, int side, std::size_t k, std::size_t m, const Loc& L) const {
        if (V.zero) return 0.0;
        return interp(V.coef[side], V.dcoef[side], nc_, n_ + k * n_ + m, L);
    }

    View make_view(const Iterate& it, bool zero) const {
        View V;
        V.S = this;
        V.zero = zero;
        if (zero) return V;
        for (int side = 0; side < 2; ++side) {
            V.v[side] = it.v[side];
            V.dv[side].assign(it.v[side].size(), 0.0);
            V.coef[side].assign(K1_ * N1_ * nc_, 0.0);
            V.dcoef[side].assign(K1_ * N1_ * nc_, 0.0);
        }
        parallel_for(2 * K1_ * N1_, c_.parallel, [&](std::size_t idx) {
            const int side = static_cast<int>(idx / (K1_ * N1_));
            const std::size_t node = idx % (K1_ * N1_);
            Vec w(V.v[side].begin() + static_cast<long>(node * n_),
                  V.v[side].begin() + static_cast<long>((node + 1) * n_));
            const CharacteristicCoefficients cc = characteristic_coefficients(model_, chart_, w);
            double* out = &V.coef[side][node * nc_];
            for (std::size_t k = 0; k < n_; ++k) out[k] = cc.lambda[k];
            if (n_ > 1)
                for (std::size_t k = 0; k < n_; ++k)
                    for (std::size_t m = 0; m < n_; ++m) out[n_ + k * n_ + m] = cc.p(k, m);
        });
        for (int side = 0; side < 2; ++side)
            for (std::size_t k = 0; k < K1_; ++k) {
                for (std::size_t c = 0; c < n_; ++c)
                    pchip_slopes(zk_.data(), &V.v[side][k * N1_ * n_ + c], N1_,
                                 &V.dv[side][k * N1_ * n_ + c], n_);
                for (std::size_t q = 0; q < nc_; ++q)
                    pchip_slopes(zk_.data(), &V.coef[side][k * N1_ * nc_ + q], N1_,
                                 &V.dcoef[side][k * N1_ * nc_ + q], nc_);
            }
        return V;
    }

    double zeta(int side, double x, double s) const {
        return (side == kPlus ? 1.0 : -1.0) * (x - curve_.phi_at(s));
    }

    double speed_i(const View& V, int side, double x, double s, double wi) const {
        const Loc L = where(zeta(side, x, s), s);
        Vec w(n_);
        for (std::size_t c = 0; c < n_; ++c) w[c] = c == fam_ ? wi : view_w(V, side, c, L);
        return model_.eigenvalues(chart_.inverse(w))[fam_];
    }

    // Carries one distinguished characteristic from s0 to s1. Returns false if
    // it crosses the curve and absorb is set.
    bool advance(const View& V, int side, double& x, double& wi, double s0, double s1,
                 bool absorb) const {
        double s = s0;
        std::vector<double> wa(n_), wb(n_), pa(n_), pb(n_);
        auto sample = [&](double xx, double ss, std::vector<double>& w, std::vector<double>& p) {
            const Loc L = where(zeta(side, xx, ss), ss);
            for (std::size_t m = 0; m < n_; ++m) {
                w[m] = m == fam_ ? 0.0 : view_w(V, side, m, L);
                p[m] = m == fam_ ? 0.0 : view_p(V, side, fam_, m, L);
            }
        };
        const bool coupled = n_ > 1 && !V.zero;
        if (coupled) sample(x, s, wa, pa);
        while (s < s1) {
            const double z = std::abs(zeta(side, x, s));
            double h = std::min({s1 - s, c_.c_cfl * std::cbrt(s * s * s + z * z), hmax_});
            h = std::max(h, 1e-9 * (s1 - s0));
            if (s + h > s1) h = s1 - s;
            const double k1 = speed_i(V, side, x, s, wi);
            const double k2 = speed_i(V, side, x + 0.5 * h * k1, s + 0.5 * h, wi);
            const double k3 = speed_i(V, side, x + 0.5 * h * k2, s + 0.5 * h, wi);
            const double k4 = speed_i(V, side, x + h * k3, s + h, wi);
            x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            s = (s + h >= s1) ? s1 : s + h;
            if (coupled) {
                sample(x, s, wb, pb);
                for (std::size_t m = 0; m < n_; ++m) wi -= 0.5 * (pa[m] + pb[m]) * (wb[m] - wa[m]);
                std::swap(wa, wb);
                std::swap(pa, pb);
            }
            if (absorb && zeta(side, x, s) < 0.0) return false;
        }
        return true;
    }

    // Position and carried value of the label at level k, ignoring the curve.
    std::pair<double, double> shoot(const View& V, int side, double b, std::size_t k) const {
        double x = (side == kPlus ? 1.0 : -1.0) * b;
        double wi = prof_.sampler(x);
        for (std::size_t q = 0; q < k; ++q) advance(V, side, x, wi, t_[q], t_[q + 1], false);
        return {x, wi};
    }

    // Distinguished-family pass: new w_i on all knots plus the labels at the curve.
    void i_pass(const View& V, Iterate& out) const {
        const std::size_t nb = labels_.size();
        for (int side = 0; side < 2; ++side) {
            const double sg = side == kPlus ? 1.0 : -1.0;
            std::vector<double> X(nb * K1_), W(nb * K1_);
            std::vector<char> alive(nb * K1_, 0);
            parallel_for(nb, c_.parallel, [&](std::size_t l) {
                double x = sg * labels_[l];
                double wi = prof_.sampler(x);
                X[l * K1_] = x;
                W[l * K1_] = wi;
                alive[l * K1_] = 1;
                for (std::size_t k = 0; k + 1 < K1_; ++k) {
                    if (!advance(V, side, x, wi, t_[k], t_[k + 1], true)) break;
                    X[l * K1_ + k + 1] = x;
                    W[l * K1_ + k + 1] = wi;
                    alive[l * K1_ + k + 1] = 1;
                }
            });

            Vec trace_w(K1_, 0.0), beta(K1_, 0.0);
            parallel_for(K1_ - 1, c_.parallel, [&](std::size_t km1) {
                const std::size_t k = km1 + 1;
                const double target = curve_.phi_at(t_[k]);
                auto F = [&](double b) { return sg * (shoot(V, side, b, k).first - target); };
                std::size_t first_alive = nb;
                for (std::size_t l = 0; l < nb; ++l)
                    if (alive[l * K1_ + k]) {
                        first_alive = l;
                        break;
                    }
                if (first_alive == nb)
                    throw Error(ErrorCode::NoRoot, "every label crossed the curve by t = " +
                                                       std::to_string(t_[k]));
                double hi = labels_[first_alive];
                double lo = first_alive > 0 ? labels_[first_alive - 1] : 0.5 * hi;
                double flo = F(lo), fhi = F(hi);
                for (int it = 0; it < 200 && flo > 0; ++it) {
                    hi = lo;
                    fhi = flo;
                    lo *= 0.5;
                    flo = F(lo);
                }
                if (flo > 0 || fhi < 0)
                    throw Error(ErrorCode::NoRoot, "no label reaches the curve at t = " +
                                                       std::to_string(t_[k]));
                double b = lo;
                if (flo < 0 && fhi > 0) {
                    boost::uintmax_t iters = 100;
                    auto r = boost::math::tools::toms748_solve(
                        F, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
                    b = 0.5 * (r.first + r.second);
                } else if (fhi == 0) {
                    b = hi;
                }
                beta[k] = sg * b;
                trace_w[k] = shoot(V, side, b, k).second;
            });

            double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
            for (std::size_t k = 0; k < K1_; ++k) {
                Vec zs{0.0}, ws{k == 0 ? prof_.sampler(0.0) : trace_w[k]};
                const double tk = t_[k];
                double prev_x = 0.0, prev_b = 0.0;
                bool have_prev = false;
                for (std::size_t l = 0; l < nb; ++l) {
                    if (!alive[l * K1_ + k]) continue;
                    const double x = X[l * K1_ + k];
                    const double z = zeta(side, x, tk);
                    if (have_prev && k > 0) {
                        const double sl = (x - prev_x) / (sg * labels_[l] - prev_b);
                        smin = std::min(smin, sl);
                        smax = std::max(smax, sl);
                    }
                    prev_x = x;
                    prev_b = sg * labels_[l];
                    have_prev = true;
                    if (z <= zs.back() + 1e-3 * zk_[1]) continue;
                    zs.push_back(z);
                    ws.push_back(W[l * K1_ + k]);
                }
                for (std::size_t a = 0; a < N1_; ++a) {
                    double val;
                    if (k == 0) val = prof_.sampler(sg * zk_[a]);
                    else if (a == 0) val = trace_w[k];
                    else val = local_lagrange(zs, ws, zk_[a]);
                    out.v[side][(k * N1_ + a) * n_ + fam_] = val;
                }
            }
            out.beta[side] = beta;
            if (side == kMinus) {
                out.slope_min = smin;
                out.slope_max = smax;
            } else {
                out.slope_min = std::min(out.slope_min, smin);
                out.slope_max = std::max(out.slope_max, smax);
            }
        }
    }

    // Boundary value of family j on side at time s (linear between levels).
    double boundary(const Iterate& it, int side, std::size_t j, double s) const {
        if (s <= 0.0) return 0.0;
        const Loc L = where(0.0, s);
        const double v0 = it.v[side][(L.k * N1_) * n_ + j];
        if (L.th == 0.0) return v0;
        const double v1 = it.v[side][((L.k + 1) * N1_) * n_ + j];
        return (1 - L.th) * v0 + L.th * v1;
    }

    // Family j != i traced backward from (z, s) through the view; picks up
    // boundary data from `bnd` on reaching the curve, zero at t = 0.
    double trace_back(const View& V, const Iterate& bnd, int side, std::size_t j, double z,
                      double s) const {
        const double sg = side == kPlus ? 1.0 : -1.0;
        auto rate = [&](double zz, double ss) {
            const Loc L = where(std::max(zz, 0.0), ss);
            return sg * (view_lambda(V, side, j, L) - curve_.sigma_at(ss));
        };
        if (s <= 0.0) return 0.0;
        if (z <= 0.0 && rate(0.0, s) >= 0.0) return boundary(bnd, side, j, s);
        std::vector<double> wa(n_), wb(n_), pa(n_), pb(n_);
        auto sample = [&](double zz, double ss, std::vector<double>& w, std::vector<double>& p) {
            const Loc L = where(zz, ss);
            for (std::size_t m = 0; m < n_; ++m) {
                w[m] = m == j ? 0.0 : view_w(V, side, m, L);
                p[m] = m == j ? 0.0 : view_p(V, side, j, m, L);
            }
        };
        sample(z, s, wa, pa);
        double acc = 0.0;
        for (int guard = 0; guard < 1000000 && s > 0.0; ++guard) {
            double h = std::min({s, c_.c_cfl * std::cbrt(s * s * s + z * z), hmax_});
            h = std::max(h, std::min(s, 1e-9 * t_.back()));
            const double k1 = rate(z, s);
            const double k2 = rate(z - 0.5 * h * k1, s - 0.5 * h);
            const double k3 = rate(z - 0.5 * h * k2, s - 0.5 * h);
            const double k4 = rate(z - h * k3, s - h);
            double znew = z - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            double snew = h >= s ? 0.0 : s - h;
            bool hit = false;
            if (znew <= 0.0) {
                const double th = z / (z - znew);
                snew = s - th * h;
                znew = 0.0;
                hit = true;
            }
            sample(znew, snew, wb, pb);
            for (std::size_t m = 0; m < n_; ++m) acc += 0.5 * (pa[m] + pb[m]) * (wa[m] - wb[m]);
            if (hit) return boundary(bnd, side, j, snew) - acc;
            z = znew;
            s = snew;
            std::swap(wa, wb);
            std::swap(pa, pb);
        }
        return -acc;
    }

    // Outgoing transverse traces and the speed from the jump conditions at level k.
    void rh_close(Iterate& it, std::size_t k, double sigma_guess) const {
        Vec wm(n_), wp(n_);
        for (std::size_t c = 0; c < n_; ++c) {
            wm[c] = it.v[kMinus][(k * N1_) * n_ + c];
            wp[c] = it.v[kPlus][(k * N1_) * n_ + c];
        }
        std::vector<std::pair<int, std::size_t>> unknowns;
        for (std::size_t c = 0; c < fam_; ++c) unknowns.push_back({kMinus, c});
        for (std::size_t c = fam_ + 1; c < n_; ++c) unknowns.push_back({kPlus, c});
        const std::size_t nu = unknowns.size() + 1;
        Vec y(nu);
        for (std::size_t q = 0; q + 1 < nu; ++q)
            y[q] = unknowns[q].first == kMinus ? wm[unknowns[q].second] : wp[unknowns[q].second];
        y[nu - 1] = sigma_guess;
        double fscale = 1.0;
        auto residual = [&](const Vec& yy) {
            Vec a = wm, b = wp;
            for (std::size_t q = 0; q + 1 < nu; ++q)
                (unknowns[q].first == kMinus ? a : b)[unknowns[q].second] = yy[q];
            const Vec um = chart_.inverse(a), up = chart_.inverse(b);
            const Vec fm = model_.flux(um), fp = model_.flux(up);
            fscale = 1.0 + std::max(norm_inf(fm), norm_inf(fp));
            return yy[nu - 1] * (up - um) - (fp - fm);
        };
        Vec F = residual(y);
        int iter = 0;
        for (; iter < 60 && norm_inf(F) > c_.tol_rh * fscale; ++iter) {
            Matrix J(n_, nu);
            for (std::size_t q = 0; q < nu; ++q) {
                Vec yp = y, ym = y;
                const double h = 1e-7 * (1.0 + std::abs(y[q]));
                yp[q] += h;
                ym[q] -= h;
                const Vec d = (1.0 / (2 * h)) * (residual(yp) - residual(ym));
                for (std::size_t r = 0; r < n_; ++r) J(r, q) = d[r];
            }
            const Vec step = solve(J, F);
            y = y - step;
            F = residual(y);
            if (norm_inf(step) <= 1e-15 * (1.0 + norm_inf(y))) break;
        }
        if (!(norm_inf(F) <= 1e-9 * fscale))
            throw Error(ErrorCode::NewtonDiverged,
                        "jump conditions unsolved at t = " + std::to_string(t_[k]));
        for (std::size_t q = 0; q + 1 < nu; ++q)
            it.v[unknowns[q].first][(k * N1_) * n_ + unknowns[q].second] = y[q];
        it.sigma_rh[k] = y[nu - 1];
    }

    Iterate blank() const {
        Iterate it;
        for (int side = 0; side < 2; ++side) {
            it.v[side].assign(K1_ * N1_ * n_, 0.0);
            it.beta[side].assign(K1_, 0.0);
        }
        it.sigma_rh = curve_.sigma;
        return it;
    }

    // One stage of the frozen-coefficient iteration.
    Iterate step(const Iterate& prev, bool zeroth) const {
        const View V = make_view(prev, zeroth);
        Iterate next = blank();
        next.sigma_rh = prev.sigma_rh;
        i_pass(V, next);
        if (zeroth || n_ == 1) {
            for (std::size_t k = 1; k < K1_; ++k)
                if (n_ == 1) rh_close(next, k, prev.sigma_rh[k]);
            return next;
        }
        // incoming transverse traces, then the jump conditions level by level
        parallel_for(K1_ - 1, c_.parallel, [&](std::size_t km1) {
            const std::size_t k = km1 + 1;
            for (std::size_t j = 0; j < n_; ++j) {
                if (j > fam_) next.v[kMinus][(k * N1_) * n_ + j] = trace_back(V, prev, kMinus, j, 0.0, t_[k]);
                if (j < fam_) next.v[kPlus][(k * N1_) * n_ + j] = trace_back(V, prev, kPlus, j, 0.0, t_[k]);
                if (j < fam_) next.v[kMinus][(k * N1_) * n_ + j] = prev.v[kMinus][(k * N1_) * n_ + j];
                if (j > fam_) next.v[kPlus][(k * N1_) * n_ + j] = prev.v[kPlus][(k * N1_) * n_ + j];
            }
            rh_close(next, k, prev.sigma_rh[k]);
        });
        parallel_for(2 * (K1_ - 1) * (N1_ - 1), c_.parallel, [&](std::size_t idx) {
            const int side = static_cast<int>(idx / ((K1_ - 1) * (N1_ - 1)));
            const std::size_t rem = idx % ((K1_ - 1) * (N1_ - 1));
            const std::size_t k = 1 + rem / (N1_ - 1), a = 1 + rem % (N1_ - 1);
            for (std::size_t j = 0; j < n_; ++j)
                if (j != fam_)
                    next.v[side][(k * N1_ + a) * n_ + j] = trace_back(V, next, side, j, zk_[a], t_[k]);
        });
        return next;
    }

    static double change(const Iterate& a, const Iterate& b) {
        double d = 0.0;
        for (int side = 0; side < 2; ++side)
            for (std::size_t q = 0; q < a.v[side].size(); ++q)
                d = std::max(d, std::abs(a.v[side][q] - b.v[side][q]));
        return d;
    }

    void check_envelopes(const Iterate& it, const Iterate& zeroth) const {
        double need = 1.0;
        for (int side = 0; side < 2; ++side)
            for (std::size_t k = 1; k < K1_; ++k)
                for (std::size_t a = 0; a < N1_; ++a) {
                    const double t = t_[k], z = zk_[a];
                    const double metric = std::pow(t * t * t + z * z, 1.0 / 6.0);
                    const std::size_t base = (k * N1_ + a) * n_;
                    for (std::size_t c = 0; c < n_; ++c) {
                        const double v = it.v[side][base + c];
                        if (!std::isfinite(v))
                            throw Error(ErrorCode::EnvelopeViolation, "non-finite field value");
                        if (c == fam_)
                            need = std::max(need, std::abs(v - zeroth.v[side][base + c]) / t);
                        else
                            need = std::max(need, std::sqrt(std::abs(v) / (t * metric)));
                    }
                }
        if (need > c_.M_cap)
            throw Error(ErrorCode::EnvelopeViolation,
                        "field envelopes need M = " + std::to_string(need) + " > M_cap");
    }

    TwoSidedSolution run(const TwoSidedSolution* warm) const {
        Iterate zeroth = step(blank(), true);
        Iterate cur = zeroth;
        if (warm && warm->t_grid.size() == K1_ && warm->nz() + 1 == N1_ && warm->n == n_) {
            for (int side = 0; side < 2; ++side)
                for (std::size_t k = 0; k < K1_; ++k)
                    for (std::size_t c = 0; c < n_; ++c) {
                        cur.v[side][(k * N1_) * n_ + c] = warm->trace[side][k * n_ + c];
                        for (std::size_t a = 1; a < N1_; ++a)
                            cur.v[side][(k * N1_ + a) * n_ + c] = warm->at(side, k, a - 1, c);
                    }
            cur.sigma_rh = warm->sigma_rh;
        }
        TwoSidedSolution sol;
        const double noise = 100.0 * c_.tol_inner;
        int above = 0;
        for (int m = 0; m < c_.max_inner; ++m) {
            Iterate next = step(cur, false);
            const double d = change(next, cur);
            cur = std::move(next);
            sol.iteration_count = m + 1;
            if (!sol.changes.empty() && sol.changes.back() > noise) {
                const double r = d / sol.changes.back();
                sol.ratios.push_back(r);
                above = r > 0.95 ? above + 1 : 0;
                if (above >= 3)
                    throw Error(ErrorCode::InnerDiverged,
                                "change ratio above 0.95 for 3 stages (last " + std::to_string(r) + ")");
            }
            sol.changes.push_back(d);
            check_envelopes(cur, zeroth);
            if (d < c_.tol_inner) {
                sol.converged = true;
                break;
            }
        }
        if (!sol.converged)
            throw Error(ErrorCode::InnerDiverged,
                        "no convergence after " + std::to_string(c_.max_inner) + " stages");
        sol.n = n_;
        sol.family = fam_;
        sol.t_grid = t_;
        sol.z_grid.assign(zk_.begin() + 1, zk_.end());
        for (int side = 0; side < 2; ++side) {
            sol.w[side].assign(K1_ * (N1_ - 1) * n_, 0.0);
            sol.w0[side].assign(K1_ * (N1_ - 1) * n_, 0.0);
            sol.trace[side].assign(K1_ * n_, 0.0);
            sol.trace0[side].assign(K1_ * n_, 0.0);
            for (std::size_t k = 0; k < K1_; ++k)
                for (std::size_t c = 0; c < n_; ++c) {
                    sol.trace[side][k * n_ + c] = cur.v[side][(k * N1_) * n_ + c];
                    sol.trace0[side][k * n_ + c] = zeroth.v[side][(k * N1_) * n_ + c];
                    for (std::size_t a = 1; a < N1_; ++a) {
                        sol.w[side][(k * (N1_ - 1) + a - 1) * n_ + c] = cur.v[side][(k * N1_ + a) * n_ + c];
                        sol.w0[side][(k * (N1_ - 1) + a - 1) * n_ + c] =
                            zeroth.v[side][(k * N1_ + a) * n_ + c];
                    }
                }
        }
        sol.beta_minus = cur.beta[kMinus];
        sol.beta_plus = cur.beta[kPlus];
        sol.sigma_rh = cur.sigma_rh;
        sol.slope_min = cur.slope_min;
        sol.slope_max = cur.slope_max;
        return sol;
    }

private:
    const SystemModel& model_;
    const CoordinateChart& chart_;
    const PreshockProfile& prof_;
    const ShockCurve& curve_;
    const ShockControls& c_;
    std::size_t n_ = 1, fam_ = 0, nc_ = 2, K1_ = 0, N1_ = 0;
    double hmax_ = 0.0;
    Vec t_, zk_, labels_;
};

}  // namespace

ShockCurve::ShockCurve(Vec times_, Vec phi_, Vec sigma_)
    : times(std::move(times_)), phi(std::move(phi_)), sigma(std::move(sigma_)) {
    rebuild();
}

void ShockCurve::rebuild() {
    phi_i_ = Pchip(times, phi);
    sigma_i_ = Pchip(times, sigma);
}

double ShockCurve::phi_at(double t) const { return phi_i_(t); }
double ShockCurve::sigma_at(double t) const { return sigma_i_(t); }

Vec TwoSidedSolution::trace_at(int side, std::size_t k) const {
    return Vec(trace[side].begin() + static_cast<long>(k * n),
               trace[side].begin() + static_cast<long>((k + 1) * n));
}

std::pair<double, double> beta_pm(const PreshockProfile& profile, const SystemModel& model,
                                  const CoordinateChart& chart, double phi_t, double t) {
    if (t <= 0.0) return {0.0, 0.0};
    const std::size_t n = static_cast<std::size_t>(model.n), i = static_cast<std::size_t>(model.index());
    const double tau = std::sqrt(t), zeta = phi_t / (tau * tau * tau);
    auto F = [&](double y) {
        const double beta = std::pow(tau * y, 3);
        const double lam = model.eigenvalues(axis_state(chart, n, i, profile.sampler(beta)))[i];
        return y * y * y + lam / tau - zeta;
    };
    const double dy = 0.02;
    auto root_from = [&](double start, double dir) {
        double y = start, fy = F(y);
        const double sign0 = fy > 0 ? 1.0 : -1.0;
        for (int it = 0; it < 200; ++it) {
            const double yn = y - dir * dy;
            const double fn = F(yn);
            if ((fn > 0 ? 1.0 : -1.0) != sign0 || fn == 0.0) {
                boost::uintmax_t iters = 100;
                double a = std::min(y, yn), b = std::max(y, yn);
                double fa = a == y ? fy : fn, fb = a == y ? fn : fy;
                if (fa == 0.0) return a;
                if (fb == 0.0) return b;
                auto r = boost::math::tools::toms748_solve(
                    F, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iters);
                return 0.5 * (r.first + r.second);
            }
            if (dir * yn <= 0.0) break;
            y = yn;
            fy = fn;
        }
        throw Error(ErrorCode::NoRoot, "eta - phi has no sign change at t = " + std::to_string(t));
    };
    const double yp = root_from(3.0, 1.0), ym = root_from(-3.0, -1.0);
    for (double y : {yp, ym}) {
        const double r = std::abs(y * y * y);
        if (r < 0.8 / 1.1 || r > 1.2 * 1.1)
            throw Error(ErrorCode::BracketViolation,
                        "|beta| / t^{3/2} = " + std::to_string(r) + " at t = " + std::to_string(t));
    }
    return {std::pow(tau * ym, 3), std::pow(tau * yp, 3)};
}

double sigma_averaged(const SystemModel& model, const Vec& u_minus, const Vec& u_plus, int q) {
    const QuadratureRule& rule = gauss_legendre_unit(q);
    const std::size_t n = u_minus.size();
    Matrix avg(n, n);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double th = rule.nodes[k];
        const Matrix J = model.jacobian(th * u_plus + (1.0 - th) * u_minus);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) avg(r, c) += rule.weights[k] * J(r, c);
    }
    if (n == 1) return avg(0, 0);
    return real_eigenvalues(avg)[static_cast<std::size_t>(model.index())];
}

RhConnection rh_connect(const SystemModel& model, const Vec& u_minus, double s, double tol) {
    const std::size_t n = u_minus.size(), i = static_cast<std::size_t>(model.index());
    RhConnection out;
    const EigenData ed = eigen_decompose(model, u_minus);
    if (s == 0.0) {
        out.u_plus = u_minus;
        out.sigma = ed.lambdas[i];
        return out;
    }
    const Vec r = ed.rights.column(i), l = ed.lefts.row(i);
    const double gn = genuine_nonlinearity(model, u_minus, model.family);
    Vec up = u_minus - s * r;
    double sigma = ed.lambdas[i] - 0.5 * s * gn;
    const Vec fm = model.flux(u_minus);
    const double scale = 1.0 + norm_inf(fm);
    for (int it = 0; it < 60; ++it) {
        if (!model.box.contains(up))
            throw Error(ErrorCode::NewtonDiverged, "connected state left the admissible box");
        const Vec fp = model.flux(up);
        Vec G(n + 1);
        for (std::size_t k = 0; k < n; ++k) G[k] = sigma * (up[k] - u_minus[k]) - (fp[k] - fm[k]);
        G[n] = dot(l, u_minus - up) - s;
        out.iterations = it;
        if (norm_inf(G) <= tol * scale) {
            out.u_plus = up;
            out.sigma = sigma;
            return out;
        }
        const Matrix A = model.jacobian(up);
        Matrix J(n + 1, n + 1);
        for (std::size_t r2 = 0; r2 < n; ++r2) {
            for (std::size_t c = 0; c < n; ++c) J(r2, c) = (r2 == c ? sigma : 0.0) - A(r2, c);
            J(r2, n) = up[r2] - u_minus[r2];
        }
        for (std::size_t c = 0; c < n; ++c) J(n, c) = -l[c];
        const Vec step = solve(J, G);
        for (std::size_t k = 0; k < n; ++k) up[k] -= step[k];
        sigma -= step[n];
        if (!std::isfinite(sigma)) break;
    }
    throw Error(ErrorCode::NewtonDiverged, "jump amplitude " + std::to_string(s) + " not connected");
}

LaxResult lax_check(const SystemModel& model, const Vec& u_minus, const Vec& u_plus, double sigma) {
    const Vec lm = model.eigenvalues(u_minus), lp = model.eigenvalues(u_plus);
    const std::size_t i = static_cast<std::size_t>(model.index()), n = lm.size();
    LaxResult r;
    if (i > 0) r.margins.push_back(sigma - lm[i - 1]);
    r.margins.push_back(lm[i] - sigma);
    r.margins.push_back(sigma - lp[i]);
    if (i + 1 < n) r.margins.push_back(lp[i + 1] - sigma);
    r.ok = std::all_of(r.margins.begin(), r.margins.end(), [](double m) { return m > 0.0; });
    return r;
}

Vec shock_time_grid(const ShockControls& c) {
    if (!(c.eps > 0.0) || c.time_levels < 3)
        throw Error(ErrorCode::BadParams, "need eps > 0 and at least 3 time levels");
    Vec t{0.0};
    for (double x : geomspace(c.t_min_ratio * c.eps, c.eps, c.time_levels)) t.push_back(x);
    t.back() = c.eps;
    return t;
}

TwoSidedSolution solve_inner(const SystemModel& model, const CoordinateChart& chart,
                             const PreshockProfile& profile, const ShockCurve& phi,
                             const ShockControls& controls, const TwoSidedSolution* warm_start) {
    InnerSolver solver(model, chart, profile, phi, controls);
    return solver.run(warm_start);
}

JumpTrace jump_trace(const SystemModel& model, const CoordinateChart& chart,
                     const TwoSidedSolution& sol, const ShockCurve& curve) {
    JumpTrace jt;
    const std::size_t i = static_cast<std::size_t>(model.index());
    for (std::size_t k = 1; k < sol.t_grid.size(); ++k) {
        const Vec wm = sol.trace_at(kMinus, k), wp = sol.trace_at(kPlus, k);
        const Vec um = chart.inverse(wm), up = chart.inverse(wp);
        const double sigma = curve.sigma[k];
        jt.times.push_back(sol.t_grid[k]);
        jt.jump_w.push_back(wm - wp);
        jt.jump_i.push_back(wm[i] - wp[i]);
        jt.mean_i.push_back(0.5 * (wm[i] + wp[i]));
        jt.sigma.push_back(sigma);
        const LaxResult lax = lax_check(model, um, up, sigma);
        jt.lax_ok.push_back(lax.ok);
        jt.lax_margin.push_back(*std::min_element(lax.margins.begin(), lax.margins.end()));
        const Vec fm = model.flux(um), fp = model.flux(up);
        const Vec res = sigma * (up - um) - (fp - fm);
        jt.rh_residual.push_back(norm_inf(res) / (1.0 + std::max(norm_inf(fm), norm_inf(fp))));
    }
    return jt;
}

ShockFit fit_shock(const SystemModel& model, const CoordinateChart& chart,
                   const PreshockProfile& profile, const ShockControls& controls,
                   const Vec& initial_phi) {
    const Vec times = shock_time_grid(controls);
    const std::size_t K1 = times.size();
    Vec phi0 = initial_phi.empty() ? Vec(K1, 0.0) : initial_phi;
    if (phi0.size() != K1) throw Error(ErrorCode::BadParams, "initial curve does not match the time grid");
    phi0[0] = 0.0;
    const std::size_t n = static_cast<std::size_t>(model.n), i = static_cast<std::size_t>(model.index());
    const double sigma_origin = model.eigenvalues(chart.inverse(Vec(n, 0.0)))[i];

    Vec sigma0 = gradient(times, phi0);
    sigma0[0] = sigma_origin;
    ShockFit fit;
    fit.curve = ShockCurve(times, phi0, sigma0);

    double M_env = profile.M_env;
    if (M_env <= 0.0) M_env = validate_envelopes(profile, envelope_grid()).M_env;

    const double noise = 100.0 * controls.tol_inner;
    int above = 0;
    TwoSidedSolution warm;
    bool have_warm = false;
    for (int m = 0; m <= controls.max_outer; ++m) {
        TwoSidedSolution sol =
            solve_inner(model, chart, profile, fit.curve, controls, have_warm ? &warm : nullptr);
        fit.inner_iterations.push_back(sol.iteration_count);
        fit.inner_ratio_max.push_back(sol.ratios.empty() ? 0.0
                                                         : *std::max_element(sol.ratios.begin(), sol.ratios.end()));
        Vec sigma_new(K1, sigma_origin);
        for (std::size_t k = 1; k < K1; ++k)
            sigma_new[k] = sigma_averaged(model, chart.inverse(sol.trace_at(kMinus, k)),
                                          chart.inverse(sol.trace_at(kPlus, k)), controls.q_avg);
        const Vec phi_new = cumulative_trapezoid(times, sigma_new);

        if (m == 0) {
            double M4 = 0.0, M2 = 0.0;
            for (std::size_t k = 1; k < K1; ++k) {
                const double t = times[k];
                M4 = std::max({M4, std::abs(phi_new[k]) / (t * t), std::abs(sigma_new[k]) / (2 * t),
                               std::abs(fit.curve.phi[k]) / (t * t),
                               std::abs(fit.curve.sigma[k]) / (2 * t)});
                for (int side = 0; side < 2; ++side)
                    for (std::size_t a = 0; a < sol.nz(); ++a) {
                        const double z = sol.z_grid[a];
                        const double metric = std::pow(t * t * t + z * z, 1.0 / 6.0);
                        for (std::size_t c = 0; c < n; ++c)
                            if (c != i) M2 = std::max(M2, std::abs(sol.at(side, k, a, c)) / (t * metric));
                    }
            }
            fit.M = 1.1 * std::max({1.0, M_env, std::pow(M4, 0.25), std::sqrt(M2)});
            if (fit.M > controls.M_cap)
                throw Error(ErrorCode::BootstrapViolation, "fitted M exceeds M_cap");
        } else {
            const double M4 = std::pow(fit.M, 4);
            for (std::size_t k = 1; k < K1; ++k) {
                const double t = times[k];
                if (std::abs(fit.curve.phi[k]) > M4 * t * t ||
                    std::abs(fit.curve.sigma[k]) > 2 * M4 * t)
                    throw Error(ErrorCode::BootstrapViolation,
                                "curve iterate " + std::to_string(m) + " leaves |phi| <= M^4 t^2 at t = " +
                                    std::to_string(t));
            }
        }

        Vec diff(K1);
        for (std::size_t k = 0; k < K1; ++k) diff[k] = sigma_new[k] - fit.curve.sigma[k];
        const double d = sup_norm(diff);
        if (!fit.outer_changes.empty() && fit.outer_changes.back() > noise) {
            const double r = d / fit.outer_changes.back();
            fit.outer_ratios.push_back(r);
            above = r > 0.99 ? above + 1 : 0;
            if (above >= 3)
                throw Error(ErrorCode::OuterDiverged, "outer ratio above 0.99 for 3 stages");
        }
        fit.outer_changes.push_back(d);
        fit.outer_iterations = m + 1;
        if (d < controls.tol_outer) {
            fit.solution = std::move(sol);
            fit.trace = jump_trace(model, chart, fit.solution, fit.curve);
            return fit;
        }
        fit.curve = ShockCurve(times, phi_new, sigma_new);
        warm = std::move(sol);
        have_warm = true;
    }
    throw Error(ErrorCode::OuterDiverged,
                "no convergence after " + std::to_string(controls.max_outer) + " outer stages");
}

UniquenessReport uniqueness_probe(const SystemModel& model, const CoordinateChart& chart,
                                  const PreshockProfile& profile, const ShockControls& controls,
                                  const std::vector<Vec>& guesses) {
    UniquenessReport rep;
    for (const Vec& g : guesses) rep.fits.push_back(fit_shock(model, chart, profile, controls, g));
    for (std::size_t a = 0; a < rep.fits.size(); ++a)
        for (std::size_t b = a + 1; b < rep.fits.size(); ++b) {
            const Vec& pa = rep.fits[a].curve.phi;
            const Vec& pb = rep.fits[b].curve.phi;
            for (std::size_t k = 0; k < pa.size(); ++k)
                rep.max_distance = std::max(rep.max_distance, std::abs(pa[k] - pb[k]));
        }
    rep.passed = rep.max_distance < 10.0 * controls.tol_outer;
    return rep;
}

}  // namespace charfront
