#include "vp2d/config.hpp"
#include "vp2d/errors.hpp"
#include "vp2d/kernels.hpp"
#include "vp2d/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct KeyOverrides {
    std::vector<std::pair<std::string, std::string>> kv;
};

// One CLI flag per config key; flags override file/preset values.
void add_key_flags(CLI::App* cmd, KeyOverrides& ov) {
    for (const std::string& key : vp2d::config_keys()) {
        if (key == "preset") continue;
        cmd->add_option_function<std::string>(
            "--" + key,
            [&ov, key](const std::string& v) { ov.kv.emplace_back(key, v); },
            "override config key '" + key + "'");
    }
}

vp2d::RunConfig load_config(const std::string& path, const std::string& preset_name,
                            const KeyOverrides& ov) {
    vp2d::RunConfig cfg;
    if (!preset_name.empty())
        cfg = vp2d::preset(preset_name);
    else if (!path.empty())
        cfg = vp2d::parse_config_file(path);
    else
        throw vp2d::ConfigError("no configuration: pass a config file or --preset");
    for (const auto& [k, v] : ov.kv) vp2d::apply_key(cfg, k, v);
    cfg.validate();
    return cfg;
}

int run_simulate(const vp2d::RunConfig& cfg) {
    vp2d::OutputWriter out(cfg.outdir);
    vp2d::Simulation sim(cfg);
    vp2d::RunResult res = sim.run(&out);
    std::printf("vp2d: %d steps, %zu -> %zu particles, wall %.2fs\n", res.steps,
                res.particles_initial, res.particles_final, res.wall_seconds);
    std::printf("vp2d: conservation max remap residual %.3e (relative), flagged cells %lld\n",
                res.max_remap_residual_rel, (long long)res.flagged_total);
    std::printf("vp2d: outputs in %s (simd: %s)\n", out.dir().c_str(), vp2d::kern::ops().name);
    return 0;
}

int run_converge(const vp2d::RunConfig& cfg) {
    vp2d::OutputWriter out(cfg.outdir);
    vp2d::ConvergenceResult res = vp2d::run_convergence_study(cfg, &out);
    std::printf("vp2d: convergence study, %zu sample times, window order q = %.4f "
                "(per-time median %.4f)\n",
                res.rows.size(), res.window_q, res.median_q);
    std::printf("vp2d: table in %s/convergence.csv\n", out.dir().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vp2d: 2D2V Vlasov-Poisson particle-in-cell with phase-space remapping"};
    app.require_subcommand(1);

    std::string sim_config, sim_preset;
    KeyOverrides sim_ov;
    CLI::App* sim = app.add_subcommand("simulate", "run a single simulation");
    sim->add_option("config", sim_config, "config file (key = value lines)");
    sim->add_option("--preset", sim_preset, "start from a preset: landau, twostream, beam");
    add_key_flags(sim, sim_ov);

    std::string conv_config, conv_preset;
    KeyOverrides conv_ov;
    CLI::App* conv = app.add_subcommand("converge", "Richardson convergence study (finest run)");
    conv->add_option("config", conv_config, "config file for the finest resolution");
    conv->add_option("--preset", conv_preset, "start from a preset: landau, twostream, beam");
    add_key_flags(conv, conv_ov);

    std::string preset_name;
    CLI::App* pre = app.add_subcommand("preset", "print a preset configuration");
    pre->add_option("name", preset_name, "landau, twostream or beam")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(load_config(sim_config, sim_preset, sim_ov));
        if (conv->parsed()) return run_converge(load_config(conv_config, conv_preset, conv_ov));
        if (pre->parsed()) {
            std::fputs(vp2d::config_to_text(vp2d::preset(preset_name)).c_str(), stdout);
            return 0;
        }
    } catch (const vp2d::ConfigError& e) {
        std::fprintf(stderr, "vp2d: config error: %s\n", e.what());
        return 1;
    } catch (const vp2d::NumericsError& e) {
        std::fprintf(stderr, "vp2d: numerical error: %s\n", e.what());
        return 2;
    } catch (const vp2d::IoError& e) {
        std::fprintf(stderr, "vp2d: io error: %s\n", e.what());
        return 3;
    }
    return 0;
}
