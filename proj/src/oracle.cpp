#include "charfront/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "charfront/errors.hpp"
#include "charfront/numerics.hpp"

namespace charfront {

const FvSnapshot& FvState::at(double t) const {
    if (snapshots.empty()) throw Error(ErrorCode::BadParams, "trajectory has no snapshots");
    std::size_t best = 0;
    for (std::size_t k = 1; k < snapshots.size(); ++k)
        if (std::abs(snapshots[k].t - t) < std::abs(snapshots[best].t - t)) best = k;
    return snapshots[best];
}

FvState fv_run(const SystemModel& model, const std::function<Vec(double)>& initial, double x_lo,
               double x_hi, double t0, double t1, double dx, double cfl, const Vec& outputs,
               const FvOptions& options) {
    if (!(cfl > 0.0 && cfl < 1.0)) throw Error(ErrorCode::BadParams, "cfl must lie in (0, 1)");
    if (!(dx > 0.0) || !(x_hi > x_lo) || t1 < t0) throw Error(ErrorCode::BadParams, "bad grid or time span");
    FvState st;
    st.x_lo = x_lo;
    st.dx = dx;
    st.cells = static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx));
    st.n = static_cast<std::size_t>(model.n);
    const std::size_t N = st.cells, n = st.n;

    Vec u(N * n, 0.0);
    const QuadratureRule& rule = gauss_legendre_unit(options.gauss_points);
    for (std::size_t k = 0; k < N; ++k) {
        const double a = x_lo + static_cast<double>(k) * dx;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Vec v = initial(a + rule.nodes[q] * dx);
            for (std::size_t c = 0; c < n; ++c) u[k * n + c] += rule.weights[q] * v[c];
        }
    }

    Vec times;
    for (double t : outputs) times.push_back(std::clamp(t, t0, t1));
    times.push_back(t1);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::size_t next_out = 0;
    while (next_out < times.size() && times[next_out] <= t0) st.snapshots.push_back({times[next_out++], u});

    Vec f(N * n), smin(N), smax(N), F((N + 1) * n), unew(N * n);
    double t = t0;
    auto check_box = [&](const Vec& v) {
        for (std::size_t k = 0; k < N; ++k) {
            const Vec uk(v.begin() + static_cast<long>(k * n), v.begin() + static_cast<long>((k + 1) * n));
            if (!model.box.contains(uk))
                throw Error(ErrorCode::BoxExit, "cell " + std::to_string(k) + " left the admissible box at t = " +
                                                    std::to_string(t));
        }
    };
    check_box(u);
    while (next_out < times.size()) {
        double amax = 0.0;
#pragma omp parallel for reduction(max : amax) if (options.parallel)
        for (long long kk = 0; kk < static_cast<long long>(N); ++kk) {
            const std::size_t k = static_cast<std::size_t>(kk);
            const Vec uk(u.begin() + static_cast<long>(k * n), u.begin() + static_cast<long>((k + 1) * n));
            const Vec fk = model.flux(uk);
            const Vec lam = model.eigenvalues(uk);
            for (std::size_t c = 0; c < n; ++c) f[k * n + c] = fk[c];
            smin[k] = lam.front();
            smax[k] = lam.back();
            amax = std::max({amax, std::abs(lam.front()), std::abs(lam.back())});
        }
        double dt = cfl * dx / std::max(amax, 1e-300);
        const double target = times[next_out];
        bool hit = false;
        if (t + dt >= target) {
            dt = target - t;
            hit = true;
        }
        // interface j sits between cells j-1 and j; outflow ghosts copy the edge cells
#pragma omp parallel for if (options.parallel)
        for (long long jj = 0; jj <= static_cast<long long>(N); ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            const std::size_t L = j == 0 ? 0 : j - 1, R = j == N ? N - 1 : j;
            const double* uL = &u[L * n];
            const double* uR = &u[R * n];
            const double* fL = &f[L * n];
            const double* fR = &f[R * n];
            if (options.flux == FvFlux::HLL) {
                const double sl = std::min(smin[L], smin[R]), sr = std::max(smax[L], smax[R]);
                for (std::size_t c = 0; c < n; ++c) {
                    if (sl >= 0.0) F[j * n + c] = fL[c];
                    else if (sr <= 0.0) F[j * n + c] = fR[c];
                    else F[j * n + c] = (sr * fL[c] - sl * fR[c] + sl * sr * (uR[c] - uL[c])) / (sr - sl);
                }
            } else {
                const double a = std::max({std::abs(smin[L]), std::abs(smax[L]), std::abs(smin[R]), std::abs(smax[R])});
                for (std::size_t c = 0; c < n; ++c)
                    F[j * n + c] = 0.5 * (fL[c] + fR[c]) - 0.5 * a * (uR[c] - uL[c]);
            }
        }
        const double r = dt / dx;
#pragma omp parallel for if (options.parallel)
        for (long long kk = 0; kk < static_cast<long long>(N); ++kk) {
            const std::size_t k = static_cast<std::size_t>(kk);
            for (std::size_t c = 0; c < n; ++c)
                unew[k * n + c] = u[k * n + c] - r * (F[(k + 1) * n + c] - F[k * n + c]);
        }
        for (std::size_t c = 0; c < n; ++c) {
            long double before = 0.0L, after = 0.0L, mass = 0.0L;
            for (std::size_t k = 0; k < N; ++k) {
                before += u[k * n + c];
                after += unew[k * n + c];
                mass += std::abs(u[k * n + c]);
            }
            const long double balance =
                (after - before) * dx + static_cast<long double>(dt) * (F[N * n + c] - F[c]);
            st.conservation_error =
                std::max(st.conservation_error,
                         static_cast<double>(std::abs(balance) / (1.0L + mass * dx)));
        }
        u.swap(unew);
        t = hit ? target : t + dt;
        ++st.steps;
        check_box(u);
        if (hit) st.snapshots.push_back({times[next_out++], u});
    }
    return st;
}

ShockLocation locate_shock(const FvState& traj, double t, std::size_t off) {
    const FvSnapshot& s = traj.at(t);
    const std::size_t N = traj.cells, n = traj.n;
    if (N < 2 * off + 8) throw Error(ErrorCode::NoShock, "window too small for the stencil");
    auto diff = [&](std::size_t k) {
        double d = 0.0;
        for (std::size_t c = 0; c < n; ++c) d += std::pow(s.u[(k + 1) * n + c] - s.u[k * n + c], 2);
        return std::sqrt(d);
    };
    std::size_t kmax = off + 3;
    for (std::size_t k = off + 3; k + off + 4 < N; ++k)
        if (diff(k) > diff(kmax)) kmax = k;

    Vec mean(n, 0.0), dev(n, 0.0);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t c = 0; c < n; ++c) mean[c] += s.u[k * n + c] / static_cast<double>(N);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t c = 0; c < n; ++c) dev[c] = std::max(dev[c], std::abs(s.u[k * n + c] - mean[c]));
    const double floor = 5.0 * std::cbrt(traj.dx) * norm_inf(dev);
    if (diff(kmax) < floor)
        throw Error(ErrorCode::NoShock, "largest cell jump " + std::to_string(diff(kmax)) +
                                            " below the noise floor " + std::to_string(floor));

    ShockLocation loc;
    loc.cell = kmax;
    Vec uL(n, 0.0), uR(n, 0.0);
    for (std::size_t q = 0; q < 3; ++q)
        for (std::size_t c = 0; c < n; ++c) {
            uL[c] += s.u[(kmax - off - q) * n + c] / 3.0;
            uR[c] += s.u[(kmax + 1 + off + q) * n + c] / 3.0;
        }
    loc.jump = uL - uR;
    std::size_t comp = 0;
    for (std::size_t c = 1; c < n; ++c)
        if (std::abs(loc.jump[c]) > std::abs(loc.jump[comp])) comp = c;
    const double mid = 0.5 * (uL[comp] + uR[comp]);
    loc.position = traj.center(kmax) + 0.5 * traj.dx;
    for (std::size_t k = kmax - off; k < kmax + 1 + off; ++k) {
        const double a = s.u[k * n + comp] - mid, b = s.u[(k + 1) * n + comp] - mid;
        if (a == 0.0) {
            loc.position = traj.center(k);
            break;
        }
        if (a * b < 0.0) {
            loc.position = traj.center(k) + traj.dx * a / (a - b);
            break;
        }
    }
    return loc;
}

}  // namespace charfront
