#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "charfront/simplewave.hpp"

namespace charfront {

struct PreshockDerivatives {
    double beta = 0.0;
    double w = 0.0, w1 = 0.0, w2 = 0.0, w3 = 0.0;
};

// Expansion of w_i(x, 0) = -x^{1/3} + a2 x^{2/3} + a3 x + O(x^{4/3}) and a
// sampler that inverts eta(beta, 0) = x in the label variable.
struct PreshockProfile {
    double a2 = 0.0, a3 = 0.0;
    double alpha2 = 0.0, alpha3 = 0.0;
    double eta4 = 0.0;
    double w0pp = 0.0, w0ppp = 0.0;
    double M_env = 0.0;
    double x_max = 0.1;
    ProfilePtr w0;   // label -> w_i at blowup time
    ProfilePtr eta;  // label -> eta(beta, 0)

    double label(double x) const;
    double sampler(double x) const;
    double dsampler(double x) const { return derivatives(x).w1; }
    double d2sampler(double x) const { return derivatives(x).w2; }
    double d3sampler(double x) const { return derivatives(x).w3; }
    PreshockDerivatives derivatives(double x) const;
    double series(double x) const;  // three-term expansion
};

std::pair<double, double> invert_eta0(double eta4);

// From a normalized, nondegenerate simple wave (blowup at the origin).
PreshockProfile expand_preshock(const SimpleWaveData& data);
// From explicit local data: w0(beta) and eta(beta, 0), both normalized.
PreshockProfile expand_preshock(ProfilePtr w0, ProfilePtr eta, double x_max = 0.1);

struct EnvelopeBound {
    std::string id;  // preshock_value, _two_term, _slope, _curvature, _third
    double constant = 0.0;  // smallest M on the grid
    double growth_slope = 0.0;  // log-log slope of the ratio near x = 0
    bool bounded = true;
};

struct EnvelopeReport {
    std::vector<EnvelopeBound> bounds;
    double M_env = 0.0;
    double holder_slope = 0.0;
    double holder_r2 = 0.0;
};

// Smallest constants for the pre-shock envelopes on x_grid; throws
// Error(EnvelopeViolation) if a ratio grows without bound toward x = 0.
EnvelopeReport validate_envelopes(const PreshockProfile& profile, const Vec& x_grid);

// Symmetric log-spaced grid +-[lo, hi].
Vec envelope_grid(double lo = 1e-10, double hi = 0.1, std::size_t per_side = 91);

}  // namespace charfront
