#include "vp2d/diagnostics.hpp"

#include "vp2d/errors.hpp"
#include "vp2d/kernels.hpp"

#include <cmath>

namespace vp2d {

std::pair<double, double> field_amplitude(const VecGrid2D& E) {
    KahanSum sx, sy;
    for (double v : E.x) sx.add(v * v);
    for (double v : E.y) sy.add(v * v);
    double area = E.g.cell_area();
    return {std::sqrt(sx.value() * area), std::sqrt(sy.value() * area)};
}

std::pair<double, double> field_linf(const VecGrid2D& E) {
    double mx = 0, my = 0;
    for (double v : E.x) mx = std::max(mx, std::abs(v));
    for (double v : E.y) my = std::max(my, std::abs(v));
    return {mx, my};
}

double fit_damping_rate(const TimeSeries& ts, double t0, double t1) {
    std::vector<double> t, lna;
    for (const TimeSample& s : ts.rows) {
        if (s.t < t0 || s.t > t1) continue;
        if (s.ex_l2 <= 0.0) continue;
        t.push_back(s.t);
        lna.push_back(std::log(s.ex_l2));
    }
    if (t.size() < 4) throw NumericsError("fit_damping_rate: window has too few samples");

    std::vector<std::size_t> peaks;
    std::ptrdiff_t last = -100;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (lna[i] > lna[i - 1] && lna[i] > lna[i + 1] && std::ptrdiff_t(i) - last >= 3) {
            peaks.push_back(i);
            last = std::ptrdiff_t(i);
        }
    }

    auto slope = [](const std::vector<double>& xs, const std::vector<double>& ys) {
        double n = double(xs.size());
        KahanSum sx, sy, sxx, sxy;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx.add(xs[i]);
            sy.add(ys[i]);
            sxx.add(xs[i] * xs[i]);
            sxy.add(xs[i] * ys[i]);
        }
        double den = n * sxx.value() - sx.value() * sx.value();
        if (den == 0.0) throw NumericsError("fit_damping_rate: degenerate time samples");
        return (n * sxy.value() - sx.value() * sy.value()) / den;
    };

    if (peaks.size() >= 3) {
        std::vector<double> pt, pa;
        for (std::size_t i : peaks) {
            pt.push_back(t[i]);
            pa.push_back(lna[i]);
        }
        return slope(pt, pa);
    }
    if (peaks.empty()) return slope(t, lna);  // no oscillation: fit the raw log-amplitude
    throw NumericsError("fit_damping_rate: too few amplitude peaks in the window");
}

Vec2 richardson_error(const VecGrid2D& fine, const VecGrid2D& coarse) {
    const FieldGeom2D& f = fine.g;
    const FieldGeom2D& c = coarse.g;
    bool ok;
    if (f.periodic && c.periodic)
        ok = f.nx == 2 * c.nx && f.ny == 2 * c.ny;
    else if (!f.periodic && !c.periodic)
        ok = f.nx - 1 == 2 * (c.nx - 1) && f.ny - 1 == 2 * (c.ny - 1);
    else
        ok = false;
    if (!ok) throw NumericsError("richardson_error: grids are not nested at ratio 2");

    Vec2 e{0.0, 0.0};
    for (int j = 0; j < c.ny; ++j)
        for (int i = 0; i < c.nx; ++i) {
            std::size_t kc = c.idx(i, j);
            std::size_t kf = f.idx(2 * i, 2 * j);
            e[0] = std::max(e[0], std::abs(fine.x[kf] - coarse.x[kc]));
            e[1] = std::max(e[1], std::abs(fine.y[kf] - coarse.y[kc]));
        }
    return e;
}

double convergence_order(const Vec2& e2h, const Vec2& eh) {
    double q = 1e300;
    for (int d = 0; d < 2; ++d) {
        if (!(e2h[d] > 0.0) || !(eh[d] > 0.0))
            throw NumericsError("convergence_order: zero error, order undefined");
        q = std::min(q, std::log2(e2h[d] / eh[d]));
    }
    return q;
}

Projection project_xvx(const ParticleSet& p, const ProjectionSpec& spec) {
    Projection out;
    out.spec = spec;
    out.F.assign(std::size_t(spec.nx) * spec.nvx, 0.0);
    const double inv_dx = 1.0 / spec.dx;
    const double inv_dv = 1.0 / spec.dv;
    const double inv_area = inv_dx * inv_dv;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double zx = kern::wrap_coord((p.x[k] - spec.x0) * inv_dx, double(spec.nx));
        double fx = std::floor(zx);
        int i = int(fx);
        double ax = zx - fx;
        int i1 = i + 1 == spec.nx ? 0 : i + 1;

        double zv = (p.vx[k] - spec.v0) * inv_dv;
        int j;
        double av;
        if (zv <= 0.0) {
            j = 0;
            av = 0.0;
            if (zv < 0.0) ++out.clamped;
        } else if (zv >= double(spec.nvx - 1)) {
            j = spec.nvx - 2;
            av = 1.0;
            if (zv > double(spec.nvx - 1)) ++out.clamped;
        } else {
            double fv = std::floor(zv);
            j = int(fv);
            av = zv - fv;
        }
        double w = p.q[k] * inv_area;
        std::size_t r0 = std::size_t(j) * spec.nx;
        std::size_t r1 = r0 + spec.nx;
        out.F[r0 + std::size_t(i)] += w * (1.0 - ax) * (1.0 - av);
        out.F[r0 + std::size_t(i1)] += w * ax * (1.0 - av);
        out.F[r1 + std::size_t(i)] += w * (1.0 - ax) * av;
        out.F[r1 + std::size_t(i1)] += w * ax * av;
    }
    return out;
}

}  // namespace vp2d
