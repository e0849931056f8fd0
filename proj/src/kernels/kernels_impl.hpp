#pragma once

// Per-particle scalar bodies shared by the scalar reference loops and the
// SIMD tail handling. Keeping one definition guarantees the tails of the
// vector kernels match the reference bitwise.

#include "vp2d/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace vp2d::kern::detail {

inline double wrap_unit(double z, double n) { return wrap_coord(z, n); }

inline void gather2_periodic_one(const double* gx, const double* gy, int nx, int ny, double ox,
                                 double oy, double inv_ex, double inv_ey, double px, double py,
                                 double* outx, double* outy) {
    double zx = wrap_unit((px - ox) * inv_ex, double(nx));
    double zy = wrap_unit((py - oy) * inv_ey, double(ny));
    double fx = std::floor(zx);
    double fy = std::floor(zy);
    double ax = zx - fx;
    double ay = zy - fy;
    int jx = int(fx);
    int jy = int(fy);
    int jx1 = jx + 1 == nx ? 0 : jx + 1;
    int jy1 = jy + 1 == ny ? 0 : jy + 1;
    double wx0 = 1.0 - ax;
    double wy0 = 1.0 - ay;
    int r0 = jy * nx;
    int r1 = jy1 * nx;
    double t0 = wx0 * gx[r0 + jx] + ax * gx[r0 + jx1];
    double t1 = wx0 * gx[r1 + jx] + ax * gx[r1 + jx1];
    *outx = wy0 * t0 + ay * t1;
    t0 = wx0 * gy[r0 + jx] + ax * gy[r0 + jx1];
    t1 = wx0 * gy[r1 + jx] + ax * gy[r1 + jx1];
    *outy = wy0 * t0 + ay * t1;
}

// Returns false when the position is outside the node support [0, n-1].
inline bool gather2_bounded_one(const double* gx, const double* gy, int nx, int ny, double ox,
                                double oy, double inv_ex, double inv_ey, double px, double py,
                                double* outx, double* outy) {
    double zx = (px - ox) * inv_ex;
    double zy = (py - oy) * inv_ey;
    if (!(zx >= 0.0 && zx <= double(nx - 1) && zy >= 0.0 && zy <= double(ny - 1))) return false;
    double fx = std::floor(zx);
    double fy = std::floor(zy);
    int jx = int(fx);
    int jy = int(fy);
    if (jx == nx - 1) --jx;
    if (jy == ny - 1) --jy;
    double ax = zx - double(jx);
    double ay = zy - double(jy);
    double wx0 = 1.0 - ax;
    double wy0 = 1.0 - ay;
    int r0 = jy * nx;
    int r1 = r0 + nx;
    double t0 = wx0 * gx[r0 + jx] + ax * gx[r0 + jx + 1];
    double t1 = wx0 * gx[r1 + jx] + ax * gx[r1 + jx + 1];
    *outx = wy0 * t0 + ay * t1;
    t0 = wx0 * gy[r0 + jx] + ax * gy[r0 + jx + 1];
    t1 = wx0 * gy[r1 + jx] + ax * gy[r1 + jx + 1];
    *outy = wy0 * t0 + ay * t1;
    return true;
}

inline double axpy_wrap_one(double x, double v, double dt, double lo, double len, double hi) {
    double w = x + dt * v;
    double t = (w - lo) / len;
    w = w - std::floor(t) * len;
    if (w >= hi) w = w - len;
    if (w < lo) w = w + len;
    return w;
}

}  // namespace vp2d::kern::detail
