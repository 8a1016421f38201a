#pragma once

#include <string>

#include "charfront/preshock.hpp"
#include "charfront/simplewave.hpp"

namespace charfront {

// Simple-wave data amplitude * (sum coeffs[k] x^k) under a smooth cutoff,
// placed on the distinguished family at t = -1. Non-empty samples replace the
// polynomial by amplitude * (quintic spline through samples[k] at x0 + k h).
struct ProfileSpec {
    Vec coeffs{0.0, -1.0, 0.3, 1.0};
    double amplitude = 0.5;
    double plateau = 0.5;
    double radius = 1.0;
    Vec samples;
    double sample_x0 = -1.0;
    double sample_h = 0.0;
};

// A blowup problem carried through to the normalized pre-shock data.
struct Problem {
    ModelBundle physical;
    SimpleWaveData wave;
    BlowupReport blowup;
    NormalizedWave normalized;
    PreshockProfile preshock;
    EnvelopeReport envelopes;
};

// The amplitude sign is flipped when needed so the profile compresses.
Problem prepare_problem(const ModelBundle& bundle, const ProfileSpec& spec);

// Default profile per builtin: burgers uses -x + x^3 exactly.
ProfileSpec default_profile(const std::string& model_name);

}  // namespace charfront
