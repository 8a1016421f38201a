#pragma once

#include <functional>
#include <vector>

#include "charfront/models.hpp"

namespace charfront {

enum class FvFlux { HLL, LaxFriedrichs };

struct FvOptions {
    FvFlux flux = FvFlux::HLL;
    int gauss_points = 5;  // per-cell quadrature of the initial data
    bool parallel = true;
};

struct FvSnapshot {
    double t = 0.0;
    Vec u;  // cells * n, row-major by cell
};

// Uniform grid of cell averages on [x_lo, x_lo + cells * dx] with outflow boundaries.
struct FvState {
    double x_lo = 0.0;
    double dx = 0.0;
    std::size_t cells = 0;
    std::size_t n = 1;
    std::vector<FvSnapshot> snapshots;  // requested output times, in order
    std::size_t steps = 0;
    // worst per-step |change of total - boundary flux| / (1 + total mass), per component
    double conservation_error = 0.0;

    double center(std::size_t k) const { return x_lo + (static_cast<double>(k) + 0.5) * dx; }
    const FvSnapshot& at(double t) const;  // snapshot closest to t
};

// First-order finite volumes from t0 to t1; dt = cfl * dx / max |lambda|.
// Snapshots at each of `outputs` (clamped to [t0, t1]) and at t1.
FvState fv_run(const SystemModel& model, const std::function<Vec(double)>& initial, double x_lo,
               double x_hi, double t0, double t1, double dx, double cfl, const Vec& outputs = {},
               const FvOptions& options = {});

struct ShockLocation {
    double position = 0.0;
    Vec jump;  // u(left plateau) - u(right plateau)
    std::size_t cell = 0;
};

// Largest cell-to-cell jump of the snapshot nearest t, refined to the
// crossing of the plateau midpoint.
ShockLocation locate_shock(const FvState& traj, double t, std::size_t off_stencil = 6);

}  // namespace charfront
