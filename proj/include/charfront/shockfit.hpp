#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "charfront/models.hpp"
#include "charfront/numerics.hpp"
#include "charfront/preshock.hpp"

namespace charfront {

// Everything below works in the normalized frame: blowup at (0, 0), the
// distinguished family carries the pre-shock data, all others vanish at t = 0.

struct ShockControls {
    double eps = 0.05;
    std::size_t time_levels = 40;  // K
    double t_min_ratio = 1e-3;     // t_1 = t_min_ratio * eps
    double z_ratio = 1.15;
    double z_min_factor = 1e-10;   // innermost offset = z_min_factor * eps^{3/2}
    double z_max = 0.0;            // 0: chosen from the characteristic speeds
    double label_ratio = 1.04;
    double c_cfl = 0.2;
    double tol_inner = 1e-9;
    double tol_outer = 1e-8;
    double tol_rh = 1e-13;
    int max_inner = 80;
    int max_outer = 40;
    double M_cap = 1e6;
    int q_avg = 8;
    bool parallel = true;
};

struct ShockCurve {
    Vec times;  // 0 = t_0 < ... < t_K = eps
    Vec phi;
    Vec sigma;

    ShockCurve() = default;
    ShockCurve(Vec times, Vec phi, Vec sigma);
    double phi_at(double t) const;
    double sigma_at(double t) const;
    void rebuild();  // refresh the interpolants after editing phi / sigma

private:
    Pchip phi_i_, sigma_i_;
};

enum Side : int { kMinus = 0, kPlus = 1 };

struct TwoSidedSolution {
    std::size_t n = 1;
    std::size_t family = 0;  // 0-based index of the shock family
    Vec z_grid;  // positive offsets from the curve, increasing
    Vec t_grid;
    // w[side][(k * nz + a) * n + c] at x = phi(t_k) -/+ z_a
    std::array<Vec, 2> w;
    // zeroth iterate: straight characteristics, transverse components zero
    std::array<Vec, 2> w0;
    // one-sided limits at the curve, trace[side][k * n + c]
    std::array<Vec, 2> trace;
    std::array<Vec, 2> trace0;
    Vec beta_minus, beta_plus;  // labels reaching the curve at t_k
    Vec sigma_rh;               // speed from the Rankine-Hugoniot closure
    double slope_min = 0.0, slope_max = 0.0;  // range of d(eta)/d(beta)
    int iteration_count = 0;
    bool converged = false;
    Vec changes;  // sup-norm change per stage
    Vec ratios;   // consecutive change ratios above the noise floor

    std::size_t nz() const { return z_grid.size(); }
    double at(int side, std::size_t k, std::size_t a, std::size_t c) const {
        return w[side][(k * nz() + a) * n + c];
    }
    Vec trace_at(int side, std::size_t k) const;
};

struct JumpTrace {
    Vec times;
    Vec jump_i;
    Vec mean_i;
    std::vector<Vec> jump_w;  // full [w] = w(phi-) - w(phi+) per time
    Vec sigma;
    std::vector<bool> lax_ok;
    Vec lax_margin;   // smallest signed margin per time
    Vec rh_residual;  // ||sigma [u] - [f]||_inf / (1 + ||f||_inf)
};

std::pair<double, double> beta_pm(const PreshockProfile& profile, const SystemModel& model,
                                  const CoordinateChart& chart, double phi_t, double t);

double sigma_averaged(const SystemModel& model, const Vec& u_minus, const Vec& u_plus, int q = 8);

struct RhConnection {
    Vec u_plus;
    double sigma = 0.0;
    int iterations = 0;
};
RhConnection rh_connect(const SystemModel& model, const Vec& u_minus, double s,
                        double tol = 1e-13);

struct LaxResult {
    bool ok = false;
    Vec margins;  // sigma - l_{i-1}(u-), l_i(u-) - sigma, sigma - l_i(u+), l_{i+1}(u+) - sigma
};
LaxResult lax_check(const SystemModel& model, const Vec& u_minus, const Vec& u_plus, double sigma);

// Time grid 0, then K geometric levels from t_min_ratio * eps to eps.
Vec shock_time_grid(const ShockControls& c);

TwoSidedSolution solve_inner(const SystemModel& model, const CoordinateChart& chart,
                             const PreshockProfile& profile, const ShockCurve& phi,
                             const ShockControls& controls,
                             const TwoSidedSolution* warm_start = nullptr);

JumpTrace jump_trace(const SystemModel& model, const CoordinateChart& chart,
                     const TwoSidedSolution& sol, const ShockCurve& curve);

struct ShockFit {
    ShockCurve curve;
    TwoSidedSolution solution;
    JumpTrace trace;
    double M = 1.0;
    int outer_iterations = 0;
    Vec outer_changes;  // d_m = sup |sigma^(m+1) - sigma^(m)|
    Vec outer_ratios;
    std::vector<int> inner_iterations;
    Vec inner_ratio_max;
};

// Outer fixed point phi^(m+1) = int sigma^(m), starting from initial_phi
// (zero curve when empty).
ShockFit fit_shock(const SystemModel& model, const CoordinateChart& chart,
                   const PreshockProfile& profile, const ShockControls& controls,
                   const Vec& initial_phi = {});

struct UniquenessReport {
    std::vector<ShockFit> fits;
    double max_distance = 0.0;
    bool passed = false;
};

UniquenessReport uniqueness_probe(const SystemModel& model, const CoordinateChart& chart,
                                  const PreshockProfile& profile, const ShockControls& controls,
                                  const std::vector<Vec>& guesses);

}  // namespace charfront
