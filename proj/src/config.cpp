#include "vp2d/config.hpp"

#include "vp2d/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vp2d {
namespace {

double parse_num(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    while (pos < v.size() && std::isspace((unsigned char)v[pos])) ++pos;
    if (pos != v.size())
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long parse_int(const std::string& key, const std::string& v) {
    double x = parse_num(key, v);
    long i = long(std::llround(x));
    if (double(i) != x) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) {
        if (tok == "none") return {};
        out.push_back(parse_num(key, tok));
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::string> config_keys() {
    return {"preset",        "problem",       "alpha",
            "kx",            "ky",            "vmax",
            "eta",           "xmax",          "base",
            "refine_v",      "dt",            "t_end",
            "remap_interval", "drop_threshold", "positivity_iters",
            "redistribution_radius", "field_ratio", "outdir",
            "snapshots",     "proj_nx",       "proj_nvx",
            "workers",       "rng_seed"};
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "problem") {
        if (value == "landau")
            cfg.problem.kind = ProblemKind::landau;
        else if (value == "twostream")
            cfg.problem.kind = ProblemKind::two_stream;
        else if (value == "beam")
            cfg.problem.kind = ProblemKind::semi_gaussian;
        else
            throw ConfigError("config: problem must be landau, twostream or beam");
    } else if (key == "alpha") {
        cfg.problem.alpha = parse_num(key, value);
    } else if (key == "kx") {
        cfg.problem.kx = parse_num(key, value);
    } else if (key == "ky") {
        cfg.problem.ky = parse_num(key, value);
    } else if (key == "vmax") {
        cfg.problem.vmax = parse_num(key, value);
    } else if (key == "eta") {
        cfg.problem.eta = parse_num(key, value);
    } else if (key == "xmax") {
        cfg.problem.xmax = parse_num(key, value);
    } else if (key == "base") {
        std::vector<double> v = parse_list(key, value);
        if (v.size() == 1) v = {v[0], v[0], v[0], v[0]};
        if (v.size() != 4) throw ConfigError("config: base expects 1 or 4 cell counts");
        for (int d = 0; d < 4; ++d) cfg.base[d] = int(parse_int(key, fmt(v[std::size_t(d)])));
    } else if (key == "refine_v") {
        std::vector<double> v = parse_list(key, value);
        if (v.empty()) {
            cfg.has_refine = false;
        } else if (v.size() == 3) {
            cfg.has_refine = true;
            cfg.refine_lo = v[0];
            cfg.refine_hi = v[1];
            cfg.refine_ratio = int(v[2]);
        } else {
            throw ConfigError("config: refine_v expects 'lo hi ratio' or 'none'");
        }
    } else if (key == "dt") {
        cfg.dt = parse_num(key, value);
    } else if (key == "t_end") {
        cfg.t_end = parse_num(key, value);
    } else if (key == "remap_interval") {
        cfg.remap.interval = int(parse_int(key, value));
    } else if (key == "drop_threshold") {
        cfg.remap.drop_threshold = parse_num(key, value);
    } else if (key == "positivity_iters") {
        cfg.remap.positivity_iters = int(parse_int(key, value));
    } else if (key == "redistribution_radius") {
        cfg.remap.redistribution_radius = int(parse_int(key, value));
    } else if (key == "field_ratio") {
        cfg.field_ratio = int(parse_int(key, value));
    } else if (key == "outdir") {
        cfg.outdir = value;
    } else if (key == "snapshots") {
        cfg.snapshots = parse_list(key, value);
    } else if (key == "proj_nx") {
        cfg.proj_nx = int(parse_int(key, value));
    } else if (key == "proj_nvx") {
        cfg.proj_nvx = int(parse_int(key, value));
    } else if (key == "workers") {
        cfg.workers = unsigned(parse_int(key, value));
    } else if (key == "rng_seed") {
        cfg.rng_seed = unsigned(parse_int(key, value));
    } else {
        std::string keys;
        for (const std::string& k : config_keys()) keys += (keys.empty() ? "" : ", ") + k;
        throw ConfigError("config: unknown key '" + key + "'; valid keys: " + keys);
    }
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "landau") {
        c.problem.kind = ProblemKind::landau;
        c.problem.alpha = 0.05;
        c.problem.kx = c.problem.ky = 0.5;
        c.problem.vmax = 6.0;
        c.base = {32, 32, 32, 32};
        c.has_refine = true;
        c.refine_lo = -3.0;
        c.refine_hi = 3.0;
        c.refine_ratio = 2;
        c.dt = 0.125;
        c.t_end = 20.0;
    } else if (name == "twostream") {
        c.problem.kind = ProblemKind::two_stream;
        c.problem.alpha = 0.05;
        c.problem.kx = c.problem.ky = 0.5;
        c.problem.vmax = 9.0;
        c.base = {32, 32, 32, 32};
        c.has_refine = true;
        c.refine_lo = -4.5;
        c.refine_hi = 4.5;
        c.refine_ratio = 2;
        c.dt = 0.125;
        c.t_end = 40.0;
    } else if (name == "beam") {
        c.problem.kind = ProblemKind::semi_gaussian;
        c.problem.eta = 0.5;
        c.problem.vmax = 10.0;
        c.problem.xmax = 10.0;
        c.base = {128, 128, 256, 256};
        c.has_refine = false;
        c.dt = 0.00052925;
        c.t_end = M_PI / 2.0;  // one focusing period of the matching field
        c.snapshots = {0.0, 0.3176, 0.5239, 0.7410, 0.9527};
    } else {
        throw ConfigError("unknown preset '" + name + "' (landau, twostream, beam)");
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t eq = line.find('=');
        std::string key, value;
        if (eq == std::string::npos) {
            std::istringstream t(line);
            if (!(t >> key)) continue;  // blank
            throw ConfigError("config " + path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        key = trim(line.substr(0, eq));
        value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (key == "preset") {
            if (!first)
                throw ConfigError("config " + path + ": 'preset' must be the first setting");
            cfg = preset(value);
        } else {
            try {
                apply_key(cfg, key, value);
            } catch (const ConfigError& e) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        first = false;
    }
    return cfg;
}

void RunConfig::validate() const {
    if (dt <= 0.0) throw ConfigError("config: dt must be > 0");
    if (t_end < 0.0) throw ConfigError("config: t_end must be >= 0");
    if (remap.interval < 0) throw ConfigError("config: remap_interval must be >= 0 (0 = never)");
    if (remap.positivity_iters < 0) throw ConfigError("config: positivity_iters must be >= 0");
    if (remap.redistribution_radius < 1)
        throw ConfigError("config: redistribution_radius must be >= 1");
    if (remap.drop_threshold < 0.0) throw ConfigError("config: drop_threshold must be >= 0");
    if (field_ratio < 1) throw ConfigError("config: field_ratio must be >= 1");
    for (int d = 0; d < 4; ++d)
        if (base[d] < 1) throw ConfigError("config: base cell counts must be >= 1");
    if (base[0] % field_ratio != 0 || base[1] % field_ratio != 0)
        throw ConfigError("config: field_ratio must divide the spatial base cells");
    if (problem.vmax <= 0.0) throw ConfigError("config: vmax must be > 0");
    if (problem.kind == ProblemKind::semi_gaussian) {
        if (!(problem.eta > 0.0 && problem.eta < 1.0))
            throw ConfigError("config: eta must lie in (0, 1)");
        if (problem.xmax <= 1.0) throw ConfigError("config: xmax must exceed the beam radius 1");
    } else {
        if (problem.kx <= 0.0 || problem.ky <= 0.0)
            throw ConfigError("config: kx and ky must be > 0");
    }
    if (has_refine) {
        if (refine_ratio < 1) throw ConfigError("config: refine ratio must be >= 1");
        if (!(refine_lo < refine_hi)) throw ConfigError("config: refine_v region is empty");
        if (refine_lo < -problem.vmax || refine_hi > problem.vmax)
            throw ConfigError("config: refine_v region exceeds the velocity domain");
    }
}

std::string config_to_text(const RunConfig& c) {
    std::ostringstream o;
    o << "problem = " << to_string(c.problem.kind) << "\n";
    if (c.problem.kind != ProblemKind::semi_gaussian) {
        o << "alpha = " << fmt(c.problem.alpha) << "\n";
        o << "kx = " << fmt(c.problem.kx) << "\n";
        o << "ky = " << fmt(c.problem.ky) << "\n";
    } else {
        o << "eta = " << fmt(c.problem.eta) << "\n";
        o << "xmax = " << fmt(c.problem.xmax) << "\n";
    }
    o << "vmax = " << fmt(c.problem.vmax) << "\n";
    o << "base = " << c.base[0] << " " << c.base[1] << " " << c.base[2] << " " << c.base[3]
      << "\n";
    if (c.has_refine)
        o << "refine_v = " << fmt(c.refine_lo) << " " << fmt(c.refine_hi) << " " << c.refine_ratio
          << "\n";
    else
        o << "refine_v = none\n";
    o << "dt = " << fmt(c.dt) << "\n";
    o << "t_end = " << fmt(c.t_end) << "\n";
    o << "remap_interval = " << c.remap.interval << "\n";
    o << "drop_threshold = " << fmt(c.remap.drop_threshold) << "\n";
    o << "positivity_iters = " << c.remap.positivity_iters << "\n";
    o << "redistribution_radius = " << c.remap.redistribution_radius << "\n";
    o << "field_ratio = " << c.field_ratio << "\n";
    o << "outdir = " << c.outdir << "\n";
    if (c.snapshots.empty()) {
        o << "snapshots = none\n";
    } else {
        o << "snapshots =";
        for (double t : c.snapshots) o << " " << fmt(t);
        o << "\n";
    }
    o << "proj_nx = " << c.proj_nx << "\n";
    o << "proj_nvx = " << c.proj_nvx << "\n";
    o << "workers = " << c.workers << "\n";
    o << "rng_seed = " << c.rng_seed << "\n";
    return o.str();
}

}  // namespace vp2d
