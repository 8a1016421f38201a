#pragma once

#include <string>

#include "charfront/models.hpp"
#include "charfront/pipeline.hpp"
#include "charfront/shockfit.hpp"

namespace charfront {

struct RunConfig {
    std::string model = "burgers";
    std::string manifest;  // JSON manifest path; overrides model when set
    Params params;
    ProfileSpec profile;
    bool profile_given = false;  // false: default_profile(model)
    ShockControls controls;
    double tol_eig = kTolEig;
    double dx = 0.0;  // 0: eps / 2000
    double cfl = 0.45;
    double window = 0.1;  // capture half-width in normalized x
    std::string flux = "hll";
    std::string out_dir = "out";
    bool quiet = false;

    double oracle_dx() const { return dx > 0.0 ? dx : controls.eps / 2000.0; }
};

// TOML-like text: [section] headers, key = value lines, '#' comments; values
// are numbers, true/false, "strings" or [number, ...] arrays. Sections:
// model (name, manifest, any other numeric key is a model parameter),
// profile, fit, oracle, output.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Throws Error(ConfigError) when an invariant is broken.
void validate_config(const RunConfig& cfg);

ModelBundle resolve_model(const RunConfig& cfg);
ProfileSpec resolve_profile(const RunConfig& cfg);

}  // namespace charfront
