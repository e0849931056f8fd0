#pragma once

#include "vp2d/problems.hpp"
#include "vp2d/remap.hpp"

#include <string>
#include <vector>

namespace vp2d {

struct RunConfig {
    ProblemSpec problem;
    Int4 base{32, 32, 32, 32};  // level-0 cells (x, y, vx, vy)
    bool has_refine = false;    // velocity-space square refinement
    double refine_lo = -3.0;
    double refine_hi = 3.0;
    int refine_ratio = 2;
    double dt = 0.125;
    double t_end = 20.0;
    RemapConfig remap;   // interval 0 disables remapping (classical PIC)
    int field_ratio = 2;  // field-grid spacing over base spatial spacing
    std::string outdir = "out";
    std::vector<double> snapshots;
    int proj_nx = 0;   // 0: base spatial cells
    int proj_nvx = 0;  // 0: base velocity cells + 1
    unsigned workers = 0;    // 0: VP2D_WORKERS or hardware
    unsigned rng_seed = 0;   // reserved; the pipeline is fully deterministic

    void validate() const;  // throws ConfigError naming the offending field
};

// The three built-in problem configurations ("landau", "twostream", "beam").
RunConfig preset(const std::string& name);

// Line-oriented "key = value" file, '#' comments. A "preset" key is only
// honored on the first line and seeds the defaults.
RunConfig parse_config_file(const std::string& path);

// Apply one key=value override; unknown keys list the valid ones.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical dump, parseable by parse_config_file; used for the manifest.
std::string config_to_text(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace vp2d
