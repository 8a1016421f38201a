#include "charfront/config.hpp"

#include <fstream>
#include <sstream>

#include "charfront/errors.hpp"

namespace charfront {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"') quoted = !quoted;
        if (line[k] == '#' && !quoted) return line.substr(0, k);
    }
    return line;
}

struct Value {
    std::string raw;
    int line = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + what);
    }
    double number() const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(raw, &used);
        } catch (...) {
            fail("expected a number, got '" + raw + "'");
        }
        if (trim(raw.substr(used)) != "") fail("expected a number, got '" + raw + "'");
        return v;
    }
    int integer() const {
        const double v = number();
        if (v != static_cast<double>(static_cast<long long>(v))) fail("expected an integer, got '" + raw + "'");
        return static_cast<int>(v);
    }
    bool boolean() const {
        if (raw == "true") return true;
        if (raw == "false") return false;
        fail("expected true or false, got '" + raw + "'");
    }
    std::string string() const {
        if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') fail("expected a quoted string");
        return raw.substr(1, raw.size() - 2);
    }
    Vec array() const {
        if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') fail("expected [a, b, ...]");
        Vec out;
        std::stringstream ss(raw.substr(1, raw.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(Value{item, line}.number());
        }
        return out;
    }
};

void apply(RunConfig& c, const std::string& section, const std::string& key, const Value& v) {
    ShockControls& s = c.controls;
    if (section == "model") {
        if (key == "name") c.model = v.string();
        else if (key == "manifest") c.manifest = v.string();
        else c.params[key] = v.number();
    } else if (section == "profile") {
        c.profile_given = true;
        ProfileSpec& p = c.profile;
        if (key == "coeffs") p.coeffs = v.array();
        else if (key == "amplitude") p.amplitude = v.number();
        else if (key == "plateau") p.plateau = v.number();
        else if (key == "radius") p.radius = v.number();
        else if (key == "samples") p.samples = v.array();
        else if (key == "x0") p.sample_x0 = v.number();
        else if (key == "h") p.sample_h = v.number();
        else v.fail("unknown profile key '" + key + "'");
    } else if (section == "fit") {
        if (key == "eps") s.eps = v.number();
        else if (key == "time_levels") s.time_levels = static_cast<std::size_t>(v.integer());
        else if (key == "t_min_ratio") s.t_min_ratio = v.number();
        else if (key == "z_ratio") s.z_ratio = v.number();
        else if (key == "z_min_factor") s.z_min_factor = v.number();
        else if (key == "z_max") s.z_max = v.number();
        else if (key == "label_ratio") s.label_ratio = v.number();
        else if (key == "c_cfl") s.c_cfl = v.number();
        else if (key == "tol_inner") s.tol_inner = v.number();
        else if (key == "tol_outer") s.tol_outer = v.number();
        else if (key == "tol_rh") s.tol_rh = v.number();
        else if (key == "tol_eig") c.tol_eig = v.number();
        else if (key == "max_inner") s.max_inner = v.integer();
        else if (key == "max_outer") s.max_outer = v.integer();
        else if (key == "M_cap") s.M_cap = v.number();
        else if (key == "q_avg") s.q_avg = v.integer();
        else if (key == "parallel") s.parallel = v.boolean();
        else v.fail("unknown fit key '" + key + "'");
    } else if (section == "oracle") {
        if (key == "dx") c.dx = v.number();
        else if (key == "cfl") c.cfl = v.number();
        else if (key == "window") c.window = v.number();
        else if (key == "flux") c.flux = v.string();
        else v.fail("unknown oracle key '" + key + "'");
    } else if (section == "output") {
        if (key == "dir") c.out_dir = v.string();
        else if (key == "quiet") c.quiet = v.boolean();
        else v.fail("unknown output key '" + key + "'");
    } else {
        v.fail("unknown section [" + section + "]");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::stringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": expected key = value");
        if (section.empty())
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": key outside any section");
        apply(cfg, section, trim(s.substr(0, eq)), Value{trim(s.substr(eq + 1)), line});
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const RunConfig& c) {
    const ShockControls& s = c.controls;
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::ConfigError, what);
    };
    need(s.eps > 0.0, "eps must be positive");
    need(s.tol_inner > 0.0 && s.tol_outer > 0.0 && s.tol_rh > 0.0 && c.tol_eig > 0.0, "tolerances must be positive");
    need(s.z_ratio > 1.0 && s.z_ratio < 2.0, "z_ratio must lie in (1, 2)");
    need(s.label_ratio > 1.0 && s.label_ratio < 2.0, "label_ratio must lie in (1, 2)");
    need(s.z_min_factor > 0.0, "z_min_factor must be positive");
    need(s.time_levels >= 3, "time_levels must be at least 3");
    need(s.t_min_ratio > 0.0 && s.t_min_ratio < 1.0, "t_min_ratio must lie in (0, 1)");
    need(s.max_inner > 0 && s.max_outer > 0, "iteration caps must be positive");
    need(s.q_avg == 5 || s.q_avg == 8 || s.q_avg == 16, "q_avg must be 5, 8 or 16");
    need(c.cfl > 0.0 && c.cfl < 1.0, "cfl must lie in (0, 1)");
    need(c.dx >= 0.0, "dx must be positive");
    need(c.window > 0.0, "window must be positive");
    need(c.flux == "hll" || c.flux == "lf", "flux must be \"hll\" or \"lf\"");
    need(!c.out_dir.empty(), "output directory must be set");
}

ModelBundle resolve_model(const RunConfig& cfg) {
    if (!cfg.manifest.empty()) return load_manifest_file(cfg.manifest);
    return builtin(cfg.model, cfg.params);
}

ProfileSpec resolve_profile(const RunConfig& cfg) {
    return cfg.profile_given ? cfg.profile : default_profile(cfg.model);
}

}  // namespace charfront
