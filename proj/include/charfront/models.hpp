#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "charfront/linalg.hpp"

namespace charfront {

struct Box {
    Vec lo, hi;
    bool contains(const Vec& u) const;
    Vec center() const;
    double radius() const;  // half of the smallest side
};

using FluxFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Matrix(const Vec&)>;
using SpectrumFn = std::function<Vec(const Vec&)>;

// Conservation law u_t + f(u)_x = 0 on an admissible box.
struct SystemModel {
    std::string name;
    int n = 1;
    int family = 1;  // distinguished family, 1-based
    Box box;
    FluxFn flux;
    JacobianFn jacobian_fn;     // empty: central differences
    SpectrumFn eigenvalues_fn;  // optional closed-form sorted eigenvalues

    int index() const { return family - 1; }
    Matrix jacobian(const Vec& u) const;
    Matrix fd_jacobian(const Vec& u) const;
    // Sorted eigenvalues; closed form when available.
    Vec eigenvalues(const Vec& u) const;
    double lambda(const Vec& u, int k) const { return eigenvalues(u)[static_cast<std::size_t>(k - 1)]; }
};

using EigenData = EigenSystem;

// Map u -> w into normal-form coordinates with forward(u_ref) = 0.
struct CoordinateChart {
    std::function<Vec(const Vec&)> forward;
    std::function<Vec(const Vec&)> inverse;
    Vec u_ref;
    Box applicable_box;
    bool approximate = false;
    bool trivial = false;  // w = u - u_ref

    Matrix inverse_jacobian(const Vec& w) const;  // du/dw by central differences
    Matrix forward_jacobian(const Vec& u) const;  // dw/du by central differences
};

constexpr double kTolEig = 1e-9;
constexpr double kTolDegenerate = 1e-10;
constexpr double kStepGN = 1e-5;

inline double jacobian_step(double u) { return 1e-6 * (1.0 + std::abs(u)); }

EigenData eigen_decompose(const SystemModel& model, const Vec& u);
double genuine_nonlinearity(const SystemModel& model, const Vec& u, int k);
double hyperbolicity_gap(const SystemModel& model, const std::vector<Vec>& samples);

// Characteristic speeds and coupling coefficients p_km = l_km / l_kk of the
// system written in chart coordinates, evaluated at w.
struct CharacteristicCoefficients {
    Vec lambda;
    Matrix p;
};
CharacteristicCoefficients characteristic_coefficients(const SystemModel& model,
                                                       const CoordinateChart& chart,
                                                       const Vec& w);

using Params = std::map<std::string, double>;

struct ModelBundle {
    SystemModel model;
    CoordinateChart chart;
};

// burgers, psystem, euler3, mhd7, linear_diag.
ModelBundle builtin(const std::string& name, const Params& params = {});
std::vector<std::string> builtin_names();

// Manifest JSON text: either {"builtin": name, "params": {...}} or a polynomial
// flux {"n", "family", "box": {"lo", "hi"}, "flux": [[{"coef", "powers"}...]...]}.
ModelBundle load_manifest_text(const std::string& json_text);
ModelBundle load_manifest_file(const std::string& path);

// Galilean shift and rescaling of a conservation law:
// f~(u) = (f(u) - shift * u) / scale. Eigenvectors are unchanged.
SystemModel shifted_model(const SystemModel& base, double shift, double scale);

// w~ = (w - w_star) / s_w.
CoordinateChart rescaled_chart(const CoordinateChart& base, const Vec& w_star, double s_w);

// Exact closed forms of the seven MHD eigenvalues at (rho, 0, 0, 0, H2, H3, S).
Vec mhd_closed_form_eigenvalues(const Params& params);

}  // namespace charfront
