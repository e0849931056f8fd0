#include "vp2d/simulation.hpp"

#include "vp2d/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace vp2d {

struct Simulation::Impl {
    RunConfig cfg;
    CompositeGrid grid;
    WorkerPool pool;
    ParticleSet particles;
    std::unique_ptr<Remapper> remapper;

    // field pipeline
    ScalarGrid2D rho, rhs, phi;
    VecGrid2D E;
    std::unique_ptr<PeriodicPoissonOp> periodic_op;
    std::unique_ptr<FreespaceSolver> freespace;
    DepositScratch dscratch;
    StepScratch sscratch;
    SpatialDomain dom;
    ExtField ext;
    double charge_sign = 1.0;
    double min_f_last = 0.0;

    Impl(const RunConfig& c, CompositeGrid g)
        : cfg(c), grid(std::move(g)), pool(WorkerPool::workers_from_env(c.workers)) {}

    const VecGrid2D& solve_at(const double* px, const double* py, const double* q,
                              std::size_t n) {
        deposit_u1(px, py, q, n, rho, pool, dscratch);
        if (cfg.problem.periodic()) {
            const std::size_t m = rho.a.size();
            rhs.g = rho.g;
            rhs.a.resize(m);
            for (std::size_t i = 0; i < m; ++i) rhs.a[i] = charge_sign * rho.a[i];
            periodic_op->solve(rhs, phi);
            compute_E_periodic(phi, E);
        } else {
            freespace->solve(rho);
            freespace->compute_E_on_d0(E);
        }
        return E;
    }

    Vec2 momentum() const {
        KahanSum px, py;
        for (std::size_t i = 0; i < particles.size(); ++i) {
            px.add(particles.q[i] * particles.vx[i]);
            py.add(particles.q[i] * particles.vy[i]);
        }
        return {px.value(), py.value()};
    }

    TimeSample record(double t) {
        TimeSample s;
        s.t = t;
        auto l2 = field_amplitude(E);
        auto li = field_linf(E);
        s.ex_l2 = l2.first;
        s.ey_l2 = l2.second;
        s.ex_linf = li.first;
        s.total_q = particles.total_charge();
        if (particles.size() > 0) {
            s.rms_x = rms(particles, Coord::x);
            s.rms_vx = rms(particles, Coord::vx);
        }
        s.min_f = min_f_last;
        return s;
    }
};

namespace {

CompositeGrid build_grid(const RunConfig& cfg) {
    const ProblemSpec& pr = cfg.problem;
    std::vector<RefinementSpec> refs;
    if (cfg.has_refine && cfg.refine_ratio > 1) {
        RefinementSpec r;
        r.lo = {pr.domain_lo()[0], pr.domain_lo()[1], cfg.refine_lo, cfg.refine_lo};
        r.hi = {pr.domain_hi()[0], pr.domain_hi()[1], cfg.refine_hi, cfg.refine_hi};
        r.ratio = {1, 1, cfg.refine_ratio, cfg.refine_ratio};
        refs.push_back(r);
    }
    return CompositeGrid::build(pr.domain_lo(), pr.domain_hi(), cfg.base, refs);
}

}  // namespace

Simulation::Simulation(const RunConfig& cfg) {
    cfg.validate();
    impl_ = std::make_unique<Impl>(cfg, build_grid(cfg));
    Impl& s = *impl_;
    const ProblemSpec& pr = cfg.problem;

    double volmax = 0.0;
    for (int l = 0; l < s.grid.num_levels(); ++l) volmax = std::max(volmax, s.grid.cell_volume(l));
    InitSupport hint = pr.support_hint(cfg.remap.drop_threshold, volmax);
    s.particles = quiet_start_init(
        s.grid, [&pr](const Vec4& z) { return pr.f0(z); }, cfg.remap.drop_threshold,
        pr.species_sign(), hint);
    s.charge_sign = s.particles.charge_sign();

    const Vec4 dlo = pr.domain_lo();
    const Vec4 dhi = pr.domain_hi();
    s.dom.lox = dlo[0];
    s.dom.loy = dlo[1];
    s.dom.Lx = dhi[0] - dlo[0];
    s.dom.Ly = dhi[1] - dlo[1];
    s.dom.periodic = pr.periodic();
    s.ext = pr.external_field();

    FieldGeom2D fg;
    if (pr.periodic()) {
        fg.nx = cfg.base[0] / cfg.field_ratio;
        fg.ny = cfg.base[1] / cfg.field_ratio;
        fg.spacing = {s.dom.Lx / fg.nx, s.dom.Ly / fg.ny};
        fg.origin = {dlo[0], dlo[1]};
        fg.periodic = true;
        s.periodic_op = std::make_unique<PeriodicPoissonOp>(fg.nx, fg.ny, fg.spacing, true);
    } else {
        int cells_x = cfg.base[0] / cfg.field_ratio;
        int cells_y = cfg.base[1] / cfg.field_ratio;
        fg.nx = cells_x + 1;
        fg.ny = cells_y + 1;
        fg.spacing = {s.dom.Lx / cells_x, s.dom.Ly / cells_y};
        fg.origin = {dlo[0], dlo[1]};
        fg.periodic = false;
        s.freespace = std::make_unique<FreespaceSolver>(fg, FreespacePadding{}, s.pool);
    }
    s.rho = ScalarGrid2D(fg);
    s.E = VecGrid2D(fg);

    if (cfg.remap.interval > 0)
        s.remapper = std::make_unique<Remapper>(s.grid, cfg.remap, pr.periodic(), pr.periodic());
}

Simulation::~Simulation() = default;

const CompositeGrid& Simulation::grid() const { return impl_->grid; }
const ParticleSet& Simulation::particles() const { return impl_->particles; }
const VecGrid2D& Simulation::field() const { return impl_->E; }

Projection Simulation::project(int nx, int nvx) const {
    const Impl& s = *impl_;
    const RunConfig& cfg = s.cfg;
    ProjectionSpec ps;
    ps.nx = nx > 0 ? nx : cfg.base[0];
    ps.nvx = nvx > 1 ? nvx : cfg.base[2] + 1;
    ps.x0 = s.dom.lox;
    ps.dx = s.dom.Lx / ps.nx;
    ps.v0 = -cfg.problem.vmax;
    ps.dv = 2.0 * cfg.problem.vmax / (ps.nvx - 1);
    return project_xvx(s.particles, ps);
}

RunResult Simulation::run(OutputWriter* out, const StepSampler* sampler) {
    Impl& s = *impl_;
    const RunConfig& cfg = s.cfg;
    RunResult res;
    auto wall0 = std::chrono::steady_clock::now();

    res.q_initial = s.particles.total_charge();
    res.particles_initial = s.particles.size();
    res.momentum_initial = s.momentum();

    if (out) {
        std::vector<std::string> extra;
        extra.push_back("levels = " + std::to_string(s.grid.num_levels()));
        extra.push_back("particles_initial = " + std::to_string(res.particles_initial));
        std::ostringstream q;
        q.precision(17);
        q << "q_initial = " << res.q_initial;
        extra.push_back(q.str());
        extra.push_back("workers = " + std::to_string(s.pool.size()));
        out->write_manifest(cfg, extra);
        out->append_log("[init] particles=" + std::to_string(res.particles_initial) +
                        " levels=" + std::to_string(s.grid.num_levels()));
    }

    int nsteps = cfg.t_end <= 0.0 ? 0 : int(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    std::vector<bool> snap_done(cfg.snapshots.size(), false);

    auto maybe_snapshot = [&](double t) {
        if (!out) return;
        for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) {
            if (snap_done[i]) continue;
            if (t >= cfg.snapshots[i] - 0.5 * cfg.dt) {
                out->write_projection(project(cfg.proj_nx, cfg.proj_nvx), cfg.snapshots[i]);
                snap_done[i] = true;
            }
        }
    };

    s.solve_at(s.particles.x.data(), s.particles.y.data(), s.particles.q.data(),
               s.particles.size());
    res.series.rows.push_back(s.record(0.0));
    if (sampler && sampler->every > 0) sampler->fn(0, 0.0, s.E);
    maybe_snapshot(0.0);

    auto solve_mid = [&](const double* px, const double* py, const double* q,
                         std::size_t n) -> const VecGrid2D& { return s.solve_at(px, py, q, n); };

    int step = 0;
    try {
        for (step = 1; step <= nsteps; ++step) {
            rk2_step(s.particles, s.dom, s.E, solve_mid, s.ext, cfg.dt, s.pool, s.sscratch);
            double t = step * cfg.dt;

            if (s.remapper && cfg.remap.interval > 0 && step % cfg.remap.interval == 0) {
                RemapReport rep = s.remapper->remap(s.particles);
                s.min_f_last = rep.min_f;
                res.remaps.push_back(rep);
                double rel = std::abs(rep.residual()) /
                             std::max(std::abs(rep.q_before), 1e-300);
                res.max_remap_residual_rel = std::max(res.max_remap_residual_rel, rel);
                res.flagged_total += rep.flagged;
                if (out) {
                    std::ostringstream o;
                    o.precision(17);
                    o << "[remap] step=" << step << " t=" << t << " before=" << rep.q_before
                      << " after=" << rep.q_after << " dropped=" << rep.dropped
                      << " lost=" << rep.lost << " residual_rel=" << rel
                      << " negatives=" << rep.negative_cells << " iters=" << rep.iterations_used
                      << " zero_capacity=" << rep.zero_capacity << " flagged=" << rep.flagged
                      << " minf=" << rep.min_f << " maxf=" << rep.max_f
                      << " particles=" << rep.particles_out;
                    out->append_log(o.str());
                }
            }

            s.solve_at(s.particles.x.data(), s.particles.y.data(), s.particles.q.data(),
                       s.particles.size());
            res.series.rows.push_back(s.record(t));
            if (sampler && sampler->every > 0 && step % sampler->every == 0)
                sampler->fn(step, t, s.E);
            maybe_snapshot(t);
        }
    } catch (const NumericsError& e) {
        std::string msg = std::string(e.what()) + " (at step " + std::to_string(step) + ")";
        if (out) {
            std::string dump = out->dump_particles(s.particles, step);
            out->append_log("[abort] " + msg + " state dump: " + dump);
            msg += "; state dump: " + dump;
        }
        throw NumericsError(msg);
    }

    res.steps = nsteps;
    res.particles_final = s.particles.size();
    res.momentum_final = s.momentum();
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    if (out) {
        out->write_timeseries(res.series);
        out->write_plot_script();
        out->write_report(cfg, res);
        std::ostringstream o;
        o.precision(17);
        o << "[done] steps=" << res.steps << " wall=" << res.wall_seconds
          << "s max_remap_residual_rel=" << res.max_remap_residual_rel
          << " particles_final=" << res.particles_final;
        out->append_log(o.str());
    }
    return res;
}

ConvergenceResult run_convergence_study(const RunConfig& finest, OutputWriter* out) {
    finest.validate();
    RunConfig cfgs[3] = {finest, finest, finest};
    for (int r = 1; r < 3; ++r) {
        for (int d = 0; d < 4; ++d) {
            int div = 1 << r;
            if (cfgs[0].base[d] % div != 0)
                throw ConfigError(
                    "convergence study: base cells must be divisible by 4 for nesting");
            cfgs[r].base[d] = cfgs[0].base[d] / div;
        }
        cfgs[r].dt = cfgs[0].dt * double(1 << r);
    }
    // Align t_end with the coarsest step so every run samples the same times.
    double dt4 = cfgs[2].dt;
    long nc = std::lround(finest.t_end / dt4);
    if (nc < 1 || std::abs(nc * dt4 - finest.t_end) > 1e-9 * std::max(1.0, finest.t_end))
        throw ConfigError("convergence study: t_end must be a multiple of 4*dt");
    for (int r = 0; r < 3; ++r) cfgs[r].t_end = nc * dt4;

    std::vector<VecGrid2D> fields[3];
    for (int r = 0; r < 3; ++r) {
        Simulation sim(cfgs[r]);
        StepSampler sampler;
        sampler.every = 4 >> r;  // fine: 4, mid: 2, coarse: 1
        sampler.fn = [&](int, double, const VecGrid2D& E) { fields[r].push_back(E); };
        sim.run(nullptr, &sampler);
    }
    std::size_t nrows = fields[2].size();
    if (fields[0].size() != nrows || fields[1].size() != nrows)
        throw NumericsError("convergence study: sample counts diverged");

    ConvergenceResult result;
    std::vector<double> qs;
    Vec2 eh_max{0.0, 0.0}, e2h_max{0.0, 0.0};
    for (std::size_t i = 0; i < nrows; ++i) {
        ConvergenceRow row;
        row.t = double(i) * dt4;
        row.eh = richardson_error(fields[0][i], fields[1][i]);
        row.e2h = richardson_error(fields[1][i], fields[2][i]);
        for (int d = 0; d < 2; ++d) {
            eh_max[d] = std::max(eh_max[d], row.eh[d]);
            e2h_max[d] = std::max(e2h_max[d], row.e2h[d]);
        }
        row.has_q = row.eh[0] > 0.0 && row.eh[1] > 0.0 && row.e2h[0] > 0.0 && row.e2h[1] > 0.0;
        if (row.has_q) {
            row.q = convergence_order(row.e2h, row.eh);
            if (row.t > 0.0) qs.push_back(row.q);
        }
        result.rows.push_back(row);
    }
    if (qs.empty())
        throw NumericsError(
            "convergence study: degenerate (zero) errors, order undefined at every time");
    std::sort(qs.begin(), qs.end());
    result.median_q = qs[qs.size() / 2];
    result.window_q = convergence_order(e2h_max, eh_max);

    if (out) {
        std::vector<std::array<double, 6>> rows;
        for (const ConvergenceRow& r : result.rows)
            rows.push_back({r.t, r.eh[0], r.eh[1], r.e2h[0], r.e2h[1], r.has_q ? r.q : 0.0});
        out->write_convergence(rows);
    }
    return result;
}

}  // namespace vp2d
