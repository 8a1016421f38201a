#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "charfront/models.hpp"

namespace charfront {

// Scalar profile with derivatives up to order 4.
class Profile {
public:
    virtual ~Profile() = default;
    virtual double eval(double x, int k = 0) const = 0;
    double operator()(double x) const { return eval(x, 0); }
};
using ProfilePtr = std::shared_ptr<const Profile>;

// sum_k coeffs[k] x^k, multiplied by a C-infinity cutoff equal to 1 on
// [-plateau, plateau] and 0 outside [-radius, radius]. radius <= 0 disables
// the cutoff.
ProfilePtr poly_bump_profile(Vec coeffs, double plateau, double radius);

// Uniformly sampled data reconstructed by a cardinal quintic B-spline (C^4).
ProfilePtr tabulated_profile(Vec samples, double x0, double h);

// (base(x0 + L y) - offset) / scale as a function of y.
ProfilePtr affine_profile(ProfilePtr base, double x0, double L, double offset, double scale);

struct SimpleWaveData {
    SystemModel model;
    CoordinateChart chart;
    ProfilePtr w_i0;
    double support_lo = -1.0, support_hi = 1.0;

    Vec wbar(double wi) const;      // (0, .., wi, .., 0)
    Vec state(double x) const;      // chart inverse of wbar(w_i0(x))
    double axis_speed(double wi) const;  // lambda_i along the i-axis
    // [L, L', L'', L'''] of the axis speed at wi (finite-difference stencils).
    std::array<double, 4> axis_speed_derivatives(double wi) const;
    double G(double x) const;
    // [G, G', G'', G'''] at x by the chain rule.
    std::array<double, 4> G_derivatives(double x) const;
};

struct BlowupReport {
    double T_star = 0.0;
    double x_star = 0.0;
    double beta_star = 0.0;
    double Gp_min = 0.0;
    double Gpp = 0.0;
    double Gppp = 0.0;
    bool unique = true;
    bool nondegenerate = false;
    std::vector<std::string> warnings;
};

constexpr double kTolND = 1e-8;

double characteristic_map(const SimpleWaveData& data, double beta, double t);
BlowupReport find_blowup(const SimpleWaveData& data, std::size_t scan_points = 10000,
                         double tol_x = 1e-12);

// Normalized frame: tau = g (t - T*), x = x* + lambda0 (t - T*) + L x~,
// w = w_star + s_w w~.
struct AffineMap {
    double t_star = 0.0;
    double x_star = 0.0;
    double lambda0 = 0.0;
    double g = 1.0;
    double L = 1.0;
    double s_w = 1.0;
    Vec w_star;

    double to_normalized_t(double t) const { return g * (t - t_star); }
    double to_physical_t(double tau) const { return t_star + tau / g; }
    double to_normalized_x(double x, double t) const { return (x - x_star - lambda0 * (t - t_star)) / L; }
    double to_physical_x(double xn, double tau) const { return x_star + lambda0 * tau / g + L * xn; }
    double to_physical_speed(double sn) const { return lambda0 + L * g * sn; }
    bool is_identity(double tol) const;
};

struct NormalizedWave {
    SimpleWaveData data;
    AffineMap map;
};

NormalizedWave normalize(const SimpleWaveData& data, const BlowupReport& report);

struct PreblowupValue {
    double beta;
    double w_i;
    Vec u;
};

PreblowupValue evaluate_preblowup(const SimpleWaveData& data, const BlowupReport& report, double x,
                                  double t);
PreblowupValue evaluate_preblowup(const SimpleWaveData& data, double x, double t);

// The normalized Burgers wave w0 = -x + x^3 used throughout tests and defaults.
SimpleWaveData burgers_cubic_wave(double plateau = 0.5, double radius = 1.0);

}  // namespace charfront
