#include "vp2d/particles.hpp"

#include "vp2d/errors.hpp"
#include "vp2d/kernels.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace vp2d {

double ParticleSet::total_charge() const {
    KahanSum s;
    for (double w : q) s.add(w);
    return s.value();
}

namespace {

Box4 hint_window(const CompositeGrid& grid, int l, const InitSupport& hint) {
    const Level& L = grid.level(l);
    Box4 w;
    w.lo = {0, 0, 0, 0};
    for (int d = 0; d < kDim; ++d) w.hi[d] = L.ncells[d] - 1;
    auto clip = [&](int d, double plo, double phi) {
        int ilo = int(std::floor((plo - grid.domain_lo()[d]) / L.h[d])) - 1;
        int ihi = int(std::ceil((phi - grid.domain_lo()[d]) / L.h[d])) + 1;
        if (ilo > w.lo[d]) w.lo[d] = ilo;
        if (ihi < w.hi[d]) w.hi[d] = ihi;
    };
    if (hint.has_spatial) {
        clip(0, hint.xlo[0], hint.xhi[0]);
        clip(1, hint.xlo[1], hint.xhi[1]);
    }
    if (hint.has_vcut) {
        clip(2, -hint.vcut, hint.vcut);
        clip(3, -hint.vcut, hint.vcut);
    }
    return w;
}

}  // namespace

ParticleSet quiet_start_init(const CompositeGrid& grid,
                             const std::function<double(const Vec4&)>& f0, double threshold,
                             int species_sign, const InitSupport& hint) {
    ParticleSet p;
    p.species_sign = species_sign;
    const double vcut2 = hint.has_vcut ? hint.vcut * hint.vcut : 0.0;
    for (int l = 0; l < grid.num_levels(); ++l) {
        const double vol = grid.cell_volume(l);
        grid.for_valid_cells(l, hint_window(grid, l, hint), [&](const CellId& c) {
            Vec4 xc = grid.cell_center(c);
            if (hint.has_vcut && xc[2] * xc[2] + xc[3] * xc[3] > vcut2) return;
            double f = f0(xc);
            if (!std::isfinite(f))
                throw NumericsError("quiet start: f0 is not finite at a cell center");
            double w = f * vol;
            if (std::abs(w) < threshold) return;
            p.append(xc[0], xc[1], xc[2], xc[3], w);
        });
    }
    return p;
}

void deposit_u1(const double* px, const double* py, const double* q, std::size_t n,
                ScalarGrid2D& rho, WorkerPool& pool, DepositScratch& scratch) {
    const FieldGeom2D& g = rho.g;
    const double inv_ex = 1.0 / g.spacing[0];
    const double inv_ey = 1.0 / g.spacing[1];
    const double inv_area = inv_ex * inv_ey;
    const std::size_t nc = chunk_count(n);
    const std::size_t gsz = g.size();
    if (scratch.bufs.size() < nc) scratch.bufs.resize(nc);

    std::atomic<std::size_t> bad{SIZE_MAX};

    pool.for_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
        auto& buf = scratch.bufs[c];
        buf.assign(gsz, 0.0);
        for (std::size_t i = b; i < e; ++i) {
            double zx = (px[i] - g.origin[0]) * inv_ex;
            double zy = (py[i] - g.origin[1]) * inv_ey;
            int jx, jy, jx1, jy1;
            if (g.periodic) {
                zx = kern::wrap_coord(zx, double(g.nx));
                zy = kern::wrap_coord(zy, double(g.ny));
                double fx = std::floor(zx), fy = std::floor(zy);
                jx = int(fx);
                jy = int(fy);
                zx -= fx;
                zy -= fy;
                jx1 = jx + 1 == g.nx ? 0 : jx + 1;
                jy1 = jy + 1 == g.ny ? 0 : jy + 1;
            } else {
                if (!(zx >= 0.0 && zx <= double(g.nx - 1) && zy >= 0.0 &&
                      zy <= double(g.ny - 1))) {
                    std::size_t prev = bad.load();
                    while (i < prev && !bad.compare_exchange_weak(prev, i)) {}
                    continue;
                }
                double fx = std::floor(zx), fy = std::floor(zy);
                jx = int(fx);
                jy = int(fy);
                if (jx == g.nx - 1) --jx;
                if (jy == g.ny - 1) --jy;
                zx -= double(jx);
                zy -= double(jy);
                jx1 = jx + 1;
                jy1 = jy + 1;
            }
            double w = q[i] * inv_area;
            double wx0 = 1.0 - zx, wy0 = 1.0 - zy;
            buf[std::size_t(jy) * g.nx + jx] += w * wx0 * wy0;
            buf[std::size_t(jy) * g.nx + jx1] += w * zx * wy0;
            buf[std::size_t(jy1) * g.nx + jx] += w * wx0 * zy;
            buf[std::size_t(jy1) * g.nx + jx1] += w * zx * zy;
        }
    });
    if (bad.load() != SIZE_MAX)
        throw NumericsError("deposit: particle " + std::to_string(bad.load()) +
                            " outside the bounded field grid support");
    rho.fill(0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& buf = scratch.bufs[c];
        for (std::size_t k = 0; k < gsz; ++k) rho.a[k] += buf[k];
    }
}

void gather_field(const VecGrid2D& E, const double* px, const double* py, std::size_t n,
                  double* ax, double* ay, WorkerPool& pool) {
    const FieldGeom2D& g = E.g;
    const double inv_ex = 1.0 / g.spacing[0];
    const double inv_ey = 1.0 / g.spacing[1];
    const kern::Ops& k = kern::ops();
    if (g.periodic) {
        pool.for_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
            k.gather2_periodic(E.x.data(), E.y.data(), g.nx, g.ny, g.origin[0], g.origin[1],
                               inv_ex, inv_ey, px + b, py + b, ax + b, ay + b, e - b);
        });
    } else {
        std::atomic<std::size_t> bad{SIZE_MAX};
        pool.for_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
            std::size_t r = k.gather2_bounded(E.x.data(), E.y.data(), g.nx, g.ny, g.origin[0],
                                              g.origin[1], inv_ex, inv_ey, px + b, py + b, ax + b,
                                              ay + b, e - b);
            if (r != SIZE_MAX) {
                std::size_t idx = b + r;
                std::size_t prev = bad.load();
                while (idx < prev && !bad.compare_exchange_weak(prev, idx)) {}
            }
        });
        if (bad.load() != SIZE_MAX)
            throw NumericsError("gather: particle " + std::to_string(bad.load()) +
                                " left the field grid support");
    }
}

Vec2 gather_field_at(const VecGrid2D& E, double px, double py) {
    double ax, ay;
    WorkerPool pool(1);
    gather_field(E, &px, &py, 1, &ax, &ay, pool);
    return {ax, ay};
}

void rk2_step(ParticleSet& p, const SpatialDomain& dom, const VecGrid2D& E1,
              const std::function<const VecGrid2D&(const double*, const double*, const double*,
                                                   std::size_t)>& solve_mid,
              const ExtField& ext, double dt, WorkerPool& pool, StepScratch& ws) {
    const std::size_t n = p.size();
    if (n == 0) return;
    const double sgn = p.charge_sign();
    const double half = 0.5 * dt;
    const kern::Ops& k = kern::ops();

    ws.xm.assign(p.x.begin(), p.x.end());
    ws.ym.assign(p.y.begin(), p.y.end());
    ws.vxm.assign(p.vx.begin(), p.vx.end());
    ws.vym.assign(p.vy.begin(), p.vy.end());
    ws.ax.resize(n);
    ws.ay.resize(n);

    // Stage 1: accelerations at the current state, half-step predictor.
    gather_field(E1, p.x.data(), p.y.data(), n, ws.ax.data(), ws.ay.data(), pool);
    pool.for_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            ws.ax[i] = sgn * (ws.ax[i] + ext.coef * p.x[i]);
            ws.ay[i] = sgn * (ws.ay[i] + ext.coef * p.y[i]);
        }
        k.axpy(ws.vxm.data() + b, ws.ax.data() + b, half, e - b);
        k.axpy(ws.vym.data() + b, ws.ay.data() + b, half, e - b);
        if (dom.periodic) {
            k.axpy_wrap(ws.xm.data() + b, p.vx.data() + b, half, dom.lox, dom.Lx, e - b);
            k.axpy_wrap(ws.ym.data() + b, p.vy.data() + b, half, dom.loy, dom.Ly, e - b);
        } else {
            k.axpy(ws.xm.data() + b, p.vx.data() + b, half, e - b);
            k.axpy(ws.ym.data() + b, p.vy.data() + b, half, e - b);
        }
    });

    // Stage 2: re-deposit and re-solve at the midpoint, full update.
    const VecGrid2D& E2 = solve_mid(ws.xm.data(), ws.ym.data(), p.q.data(), n);
    gather_field(E2, ws.xm.data(), ws.ym.data(), n, ws.ax.data(), ws.ay.data(), pool);
    pool.for_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            ws.ax[i] = sgn * (ws.ax[i] + ext.coef * ws.xm[i]);
            ws.ay[i] = sgn * (ws.ay[i] + ext.coef * ws.ym[i]);
        }
        if (dom.periodic) {
            k.axpy_wrap(p.x.data() + b, ws.vxm.data() + b, dt, dom.lox, dom.Lx, e - b);
            k.axpy_wrap(p.y.data() + b, ws.vym.data() + b, dt, dom.loy, dom.Ly, e - b);
        } else {
            k.axpy(p.x.data() + b, ws.vxm.data() + b, dt, e - b);
            k.axpy(p.y.data() + b, ws.vym.data() + b, dt, e - b);
        }
        k.axpy(p.vx.data() + b, ws.ax.data() + b, dt, e - b);
        k.axpy(p.vy.data() + b, ws.ay.data() + b, dt, e - b);
    });
}

}  // namespace vp2d
