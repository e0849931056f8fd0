// NEON kernel variants (AArch64 baseline, 2-wide doubles). The gather kernels
// stay on the shared scalar bodies: bilinear gathers are load-bound and NEON
// has no vector gather. Arithmetic kernels mirror the scalar operation tree
// exactly, so results are bitwise equal to the reference.

#include "kernels_impl.hpp"
#include "vp2d/kernels.hpp"

#include <arm_neon.h>

namespace vp2d::kern {
namespace {

void gather2_periodic_neon(const double* gx, const double* gy, int nx, int ny, double ox,
                           double oy, double inv_ex, double inv_ey, const double* px,
                           const double* py, double* ax, double* ay, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        detail::gather2_periodic_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i], &ax[i],
                                     &ay[i]);
}

std::size_t gather2_bounded_neon(const double* gx, const double* gy, int nx, int ny, double ox,
                                 double oy, double inv_ex, double inv_ey, const double* px,
                                 const double* py, double* ax, double* ay, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!detail::gather2_bounded_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i],
                                         &ax[i], &ay[i]))
            return i;
    return SIZE_MAX;
}

void axpy_wrap_neon(double* x, const double* v, double dt, double lo, double len, std::size_t n) {
    double hi = lo + len;
    const float64x2_t vdt = vdupq_n_f64(dt), vlo = vdupq_n_f64(lo);
    const float64x2_t vlen = vdupq_n_f64(len), vhi = vdupq_n_f64(hi);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t w = vaddq_f64(vld1q_f64(x + i), vmulq_f64(vdt, vld1q_f64(v + i)));
        float64x2_t t = vdivq_f64(vsubq_f64(w, vlo), vlen);
        w = vsubq_f64(w, vmulq_f64(vrndmq_f64(t), vlen));
        uint64x2_t m = vcgeq_f64(w, vhi);
        w = vbslq_f64(m, vsubq_f64(w, vlen), w);
        m = vcltq_f64(w, vlo);
        w = vbslq_f64(m, vaddq_f64(w, vlen), w);
        vst1q_f64(x + i, w);
    }
    for (; i < n; ++i) x[i] = detail::axpy_wrap_one(x[i], v[i], dt, lo, len, hi);
}

void axpy_neon(double* x, const double* v, double dt, std::size_t n) {
    const float64x2_t vdt = vdupq_n_f64(dt);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t w = vaddq_f64(vld1q_f64(x + i), vmulq_f64(vdt, vld1q_f64(v + i)));
        vst1q_f64(x + i, w);
    }
    for (; i < n; ++i) x[i] = x[i] + dt * v[i];
}

void w4_cell_add_neon(double* f, const std::ptrdiff_t offx[4], const std::ptrdiff_t offy[4],
                      const std::ptrdiff_t offk[4], std::ptrdiff_t offl0, const double wx[4],
                      const double wy[4], const double wk[4], const double wl[4], double coeff) {
    const float64x2_t wl01 = vld1q_f64(wl);
    const float64x2_t wl23 = vld1q_f64(wl + 2);
    for (int i = 0; i < 4; ++i) {
        double ci = coeff * wx[i];
        for (int j = 0; j < 4; ++j) {
            double cij = ci * wy[j];
            std::ptrdiff_t oij = offx[i] + offy[j];
            for (int k = 0; k < 4; ++k) {
                double c = cij * wk[k];
                double* p = f + oij + offk[k] + offl0;
                float64x2_t vc = vdupq_n_f64(c);
                vst1q_f64(p, vaddq_f64(vld1q_f64(p), vmulq_f64(vc, wl01)));
                vst1q_f64(p + 2, vaddq_f64(vld1q_f64(p + 2), vmulq_f64(vc, wl23)));
            }
        }
    }
}

}  // namespace

const Ops* neon_ops() {
    static const Ops t{"neon",         gather2_periodic_neon, gather2_bounded_neon,
                       axpy_wrap_neon, axpy_neon,             w4_cell_add_neon};
    return &t;
}

}  // namespace vp2d::kern
