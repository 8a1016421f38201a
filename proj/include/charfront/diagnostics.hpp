#pragma once

#include <functional>
#include <string>
#include <vector>

#include "charfront/preshock.hpp"
#include "charfront/shockfit.hpp"

namespace charfront {

struct HolderSample {
    double x = 0.0;
    double t = 0.0;
    double value = 0.0;
};

struct HolderFit {
    double slope = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
    double decades = 0.0;  // span of the metric actually used
};

// Slope of log|value - center| against log (t^3 + (x - phi(t))^2)^{1/6}.
// Needs >= 30 usable samples over >= 3 decades of the metric, else
// Error(InsufficientSpan). Samples with metric < 1e-12 are skipped.
HolderFit holder_exponent(const std::vector<HolderSample>& samples, double center,
                          const std::function<double(double)>& phi);

// Regression of per-bin maxima of log q against log v: the exponent of the
// tightest power law bounding q from above.
LinearFit upper_envelope_fit(const Vec& v, const Vec& q, std::size_t bins = 16);

struct EstimateCheck {
    std::string id;
    std::string variable;           // what the bound is a power of
    double fitted_constant = 0.0;   // sup q / weight
    double claimed_constant = 0.0;  // from the frozen M or the fixed numbers
    double worst_ratio = 0.0;       // fitted / claimed
    bool passed = false;            // worst_ratio <= slack
    bool has_exponent = false;
    double claimed_exponent = 0.0;
    double fitted_exponent = 0.0;
    double exponent_r2 = 0.0;
    std::size_t samples = 0;
};

struct EstimateReport {
    double slack = 1.10;
    std::vector<EstimateCheck> checks;

    bool all_passed() const;
    const EstimateCheck& find(const std::string& id) const;
};

// Fitted constants and exponents of the a-priori envelopes on a converged run.
// The pre-shock envelope report is folded in when given.
EstimateReport envelope_suite(const TwoSidedSolution& solution, const ShockCurve& curve,
                              const JumpTrace& trace, double M,
                              const EnvelopeReport* preshock = nullptr, bool parallel = true);

}  // namespace charfront
