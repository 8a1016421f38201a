#include "charfront/pipeline.hpp"

#include "charfront/errors.hpp"

namespace charfront {

Problem prepare_problem(const ModelBundle& bundle, const ProfileSpec& spec) {
    Problem p;
    p.physical = bundle;
    p.wave.model = bundle.model;
    p.wave.chart = bundle.chart;
    p.wave.support_lo = -spec.radius;
    p.wave.support_hi = spec.radius;
    const double slope = p.wave.axis_speed_derivatives(0.0)[1];
    if (slope == 0.0)
        throw Error(ErrorCode::Degenerate, "distinguished family is linearly degenerate at the reference state");
    double amp = slope > 0 ? std::abs(spec.amplitude) : -std::abs(spec.amplitude);
    if (!spec.samples.empty()) {
        if (!(spec.sample_h > 0.0)) throw Error(ErrorCode::BadParams, "tabulated profile needs a positive spacing");
        Vec samples = spec.samples;
        for (double& v : samples) v *= amp;
        p.wave.w_i0 = tabulated_profile(samples, spec.sample_x0, spec.sample_h);
        p.wave.support_lo = spec.sample_x0;
        p.wave.support_hi = spec.sample_x0 + spec.sample_h * static_cast<double>(samples.size() - 1);
    } else {
        Vec coeffs = spec.coeffs;
        for (double& c : coeffs) c *= amp;
        p.wave.w_i0 = poly_bump_profile(coeffs, spec.plateau, spec.radius);
    }
    p.blowup = find_blowup(p.wave);
    p.normalized = normalize(p.wave, p.blowup);
    p.preshock = expand_preshock(p.normalized.data);
    p.envelopes = validate_envelopes(p.preshock, envelope_grid());
    p.preshock.M_env = p.envelopes.M_env;
    return p;
}

ProfileSpec default_profile(const std::string& model_name) {
    ProfileSpec s;
    if (model_name == "burgers") {
        s.coeffs = {0.0, -1.0, 0.0, 1.0};
        s.amplitude = 1.0;
    }
    return s;
}

}  // namespace charfront
