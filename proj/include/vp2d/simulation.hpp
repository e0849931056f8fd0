#pragma once

#include "vp2d/config.hpp"
#include "vp2d/diagnostics.hpp"
#include "vp2d/poisson_freespace.hpp"
#include "vp2d/poisson_periodic.hpp"
#include "vp2d/remap.hpp"
#include "vp2d/workers.hpp"

#include <functional>
#include <memory>
#include <string>

namespace vp2d {

struct RunResult {
    TimeSeries series;
    std::vector<RemapReport> remaps;
    double q_initial = 0.0;
    std::size_t particles_initial = 0;
    std::size_t particles_final = 0;
    double max_remap_residual_rel = 0.0;
    std::int64_t flagged_total = 0;
    // momentum sum q*v, tracked as a diagnostic (no tight bound is claimed
    // for the deposit/gather pair)
    Vec2 momentum_initial{};
    Vec2 momentum_final{};
    int steps = 0;
    double wall_seconds = 0.0;
};

class OutputWriter {
  public:
    explicit OutputWriter(std::string outdir);

    const std::string& dir() const { return dir_; }

    void write_manifest(const RunConfig& cfg, const std::vector<std::string>& extra);
    void append_log(const std::string& line);
    void write_timeseries(const TimeSeries& ts) const;
    void write_projection(const Projection& proj, double t) const;
    void write_plot_script() const;
    void write_report(const RunConfig& cfg, const RunResult& r) const;
    std::string dump_particles(const ParticleSet& p, int step) const;
    void write_convergence(const std::vector<std::array<double, 6>>& rows) const;

  private:
    std::string dir_;
};

TimeSeries parse_timeseries(const std::string& path);

// Invoked after each diagnostics record whose step index is a multiple of
// `every` (step 0 included).
struct StepSampler {
    int every = 1;
    std::function<void(int step, double t, const VecGrid2D& E)> fn;
};

class Simulation {
  public:
    explicit Simulation(const RunConfig& cfg);
    ~Simulation();

    RunResult run(OutputWriter* out, const StepSampler* sampler = nullptr);

    const CompositeGrid& grid() const;
    const ParticleSet& particles() const;
    const VecGrid2D& field() const;
    Projection project(int nx, int nvx) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ConvergenceRow {
    double t = 0.0;
    Vec2 eh{};   // |E^h - E^{2h}| per direction
    Vec2 e2h{};  // |E^{2h} - E^{4h}| per direction
    double q = 0.0;
    bool has_q = false;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double median_q = 0.0;  // of the per-time orders, rows with t > 0
    // Order of the window-wide error norms: the per-time errors of an
    // oscillatory field pass through zero as the resolutions dephase, so the
    // L-inf norm over nodes *and* sample times is the robust statistic.
    double window_q = 0.0;
};

// Richardson study on (h, dt), (2h, 2dt), (4h, 4dt); the config describes the
// finest run. Aborts with a degenerate-error message when the errors vanish.
ConvergenceResult run_convergence_study(const RunConfig& finest, OutputWriter* out);

}  // namespace vp2d
