#pragma once

#include <cmath>
#include <cstddef>

namespace vp2d::kern {

enum class Isa { scalar, avx2, neon };

// First-order hat function (cloud-in-cell).
inline double u1_eval(double z) {
    double a = std::abs(z);
    return a <= 1.0 ? 1.0 - a : 0.0;
}

// Monaghan M4' cubic, third-order accurate, support |x| < 2h, negative on
// 1 < s < 2. The operation sequence is fixed: the SIMD variants evaluate the
// identical tree so scalar and vector results are bitwise equal.
inline double w4_eval_s(double s) {
    if (s < 1.0) {
        double s2 = s * s;
        return (1.0 - 2.5 * s2) + (1.5 * s2) * s;
    }
    if (s < 2.0) {
        double t = 2.0 - s;
        return ((0.5 * t) * t) * (1.0 - s);
    }
    return 0.0;
}

inline double w4_eval(double x, double h) { return w4_eval_s(std::abs(x) / h); }

// Fold a grid coordinate that drifted out of [0, n) by one period back in.
inline double wrap_coord(double z, double n) {
    if (z >= n) z -= n;
    if (z < 0.0) z += n;
    return z;
}

// Batch kernels over structure-of-arrays particle data. Each entry has a
// scalar reference implementation plus SIMD variants selected at runtime;
// all variants produce bitwise-identical output.
struct Ops {
    const char* name;

    // Bilinear gather from a periodic node grid (component arrays gx, gy laid
    // out row-major, x fastest). Positions must already be wrapped so that
    // (p - o) / eps lies in [0, n) up to round-off.
    void (*gather2_periodic)(const double* gx, const double* gy, int nx, int ny, double ox,
                             double oy, double inv_ex, double inv_ey, const double* px,
                             const double* py, double* ax, double* ay, std::size_t n);

    // Bounded grid: nodes 0..nx-1 span the support inclusively. Returns the
    // index of the first particle outside the support, or SIZE_MAX.
    std::size_t (*gather2_bounded)(const double* gx, const double* gy, int nx, int ny, double ox,
                                   double oy, double inv_ex, double inv_ey, const double* px,
                                   const double* py, double* ax, double* ay, std::size_t n);

    // x[i] += dt*v[i], wrapped into [lo, lo+len).
    void (*axpy_wrap)(double* x, const double* v, double dt, double lo, double len, std::size_t n);

    // x[i] += dt*v[i].
    void (*axpy)(double* x, const double* v, double dt, std::size_t n);

    // Tensor-product scatter-add of one particle's 4^4 stencil:
    //   f[offx[i]+offy[j]+offk[k]+offl0+l] += ((coeff*wx[i])*wy[j]*wk[k]) * wl[l]
    // for i,j,k,l in 0..3. The l offsets are contiguous (unit stride).
    void (*w4_cell_add)(double* f, const std::ptrdiff_t offx[4], const std::ptrdiff_t offy[4],
                        const std::ptrdiff_t offk[4], std::ptrdiff_t offl0, const double wx[4],
                        const double wy[4], const double wk[4], const double wl[4], double coeff);
};

// Active table: best ISA supported by this CPU, or the one named by VP2D_ISA
// ("scalar", "avx2", "neon") when that is available.
const Ops& ops();
Isa active_isa();

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unsupported by build or CPU
const Ops* neon_ops();

}  // namespace vp2d::kern
