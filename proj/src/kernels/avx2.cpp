// AVX2 kernel variants. Compiled with -mavx2 (no FMA: the scalar reference
// uses separate multiply/add, and equivalence tests require bitwise equality).

#include "kernels_impl.hpp"
#include "vp2d/kernels.hpp"

#include <immintrin.h>

namespace vp2d::kern {
namespace {

inline __m256d wrap_unit4(__m256d z, __m256d n) {
    __m256d m = _mm256_cmp_pd(z, n, _CMP_GE_OQ);
    z = _mm256_blendv_pd(z, _mm256_sub_pd(z, n), m);
    m = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_LT_OQ);
    z = _mm256_blendv_pd(z, _mm256_add_pd(z, n), m);
    return z;
}

inline __m256d bilerp4(const double* g, __m128i i00, __m128i i10, __m128i i01, __m128i i11,
                       __m256d wx0, __m256d ax, __m256d wy0, __m256d ay) {
    __m256d g00 = _mm256_i32gather_pd(g, i00, 8);
    __m256d g10 = _mm256_i32gather_pd(g, i10, 8);
    __m256d g01 = _mm256_i32gather_pd(g, i01, 8);
    __m256d g11 = _mm256_i32gather_pd(g, i11, 8);
    __m256d t0 = _mm256_add_pd(_mm256_mul_pd(wx0, g00), _mm256_mul_pd(ax, g10));
    __m256d t1 = _mm256_add_pd(_mm256_mul_pd(wx0, g01), _mm256_mul_pd(ax, g11));
    return _mm256_add_pd(_mm256_mul_pd(wy0, t0), _mm256_mul_pd(ay, t1));
}

void gather2_periodic_avx2(const double* gx, const double* gy, int nx, int ny, double ox,
                           double oy, double inv_ex, double inv_ey, const double* px,
                           const double* py, double* ax_out, double* ay_out, std::size_t n) {
    const __m256d vox = _mm256_set1_pd(ox), voy = _mm256_set1_pd(oy);
    const __m256d viex = _mm256_set1_pd(inv_ex), viey = _mm256_set1_pd(inv_ey);
    const __m256d vnx = _mm256_set1_pd(double(nx)), vny = _mm256_set1_pd(double(ny));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m128i inx = _mm_set1_epi32(nx), iny = _mm_set1_epi32(ny);
    const __m128i ione = _mm_set1_epi32(1);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d zx = wrap_unit4(_mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(px + i), vox), viex), vnx);
        __m256d zy = wrap_unit4(_mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(py + i), voy), viey), vny);
        __m256d fx = _mm256_floor_pd(zx);
        __m256d fy = _mm256_floor_pd(zy);
        __m256d ax = _mm256_sub_pd(zx, fx);
        __m256d ay = _mm256_sub_pd(zy, fy);
        __m128i jx = _mm256_cvttpd_epi32(fx);
        __m128i jy = _mm256_cvttpd_epi32(fy);
        __m128i jx1 = _mm_add_epi32(jx, ione);
        jx1 = _mm_andnot_si128(_mm_cmpeq_epi32(jx1, inx), jx1);
        __m128i jy1 = _mm_add_epi32(jy, ione);
        jy1 = _mm_andnot_si128(_mm_cmpeq_epi32(jy1, iny), jy1);
        __m128i r0 = _mm_mullo_epi32(jy, inx);
        __m128i r1 = _mm_mullo_epi32(jy1, inx);
        __m128i i00 = _mm_add_epi32(r0, jx);
        __m128i i10 = _mm_add_epi32(r0, jx1);
        __m128i i01 = _mm_add_epi32(r1, jx);
        __m128i i11 = _mm_add_epi32(r1, jx1);
        __m256d wx0 = _mm256_sub_pd(one, ax);
        __m256d wy0 = _mm256_sub_pd(one, ay);
        _mm256_storeu_pd(ax_out + i, bilerp4(gx, i00, i10, i01, i11, wx0, ax, wy0, ay));
        _mm256_storeu_pd(ay_out + i, bilerp4(gy, i00, i10, i01, i11, wx0, ax, wy0, ay));
    }
    for (; i < n; ++i)
        detail::gather2_periodic_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i],
                                     &ax_out[i], &ay_out[i]);
}

std::size_t gather2_bounded_avx2(const double* gx, const double* gy, int nx, int ny, double ox,
                                 double oy, double inv_ex, double inv_ey, const double* px,
                                 const double* py, double* ax_out, double* ay_out, std::size_t n) {
    const __m256d vox = _mm256_set1_pd(ox), voy = _mm256_set1_pd(oy);
    const __m256d viex = _mm256_set1_pd(inv_ex), viey = _mm256_set1_pd(inv_ey);
    const __m256d vmx = _mm256_set1_pd(double(nx - 1)), vmy = _mm256_set1_pd(double(ny - 1));
    const __m256d one = _mm256_set1_pd(1.0), zero = _mm256_setzero_pd();
    const __m128i inx = _mm_set1_epi32(nx);
    const __m128i imx = _mm_set1_epi32(nx - 1), imy = _mm_set1_epi32(ny - 1);
    const __m128i ione = _mm_set1_epi32(1);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d zx = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(px + i), vox), viex);
        __m256d zy = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(py + i), voy), viey);
        __m256d ok = _mm256_and_pd(_mm256_cmp_pd(zx, zero, _CMP_GE_OQ),
                                   _mm256_cmp_pd(zx, vmx, _CMP_LE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(zy, zero, _CMP_GE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(zy, vmy, _CMP_LE_OQ));
        if (_mm256_movemask_pd(ok) != 0xf) {
            for (std::size_t k = i; k < i + 4; ++k)
                if (!detail::gather2_bounded_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[k],
                                                 py[k], &ax_out[k], &ay_out[k]))
                    return k;
            continue;
        }
        __m128i jx = _mm256_cvttpd_epi32(_mm256_floor_pd(zx));
        __m128i jy = _mm256_cvttpd_epi32(_mm256_floor_pd(zy));
        jx = _mm_sub_epi32(jx, _mm_and_si128(_mm_cmpeq_epi32(jx, imx), ione));
        jy = _mm_sub_epi32(jy, _mm_and_si128(_mm_cmpeq_epi32(jy, imy), ione));
        __m256d ax = _mm256_sub_pd(zx, _mm256_cvtepi32_pd(jx));
        __m256d ay = _mm256_sub_pd(zy, _mm256_cvtepi32_pd(jy));
        __m128i r0 = _mm_add_epi32(_mm_mullo_epi32(jy, inx), jx);
        __m128i r1 = _mm_add_epi32(r0, inx);
        __m128i i10 = _mm_add_epi32(r0, ione);
        __m128i i11 = _mm_add_epi32(r1, ione);
        __m256d wx0 = _mm256_sub_pd(one, ax);
        __m256d wy0 = _mm256_sub_pd(one, ay);
        _mm256_storeu_pd(ax_out + i, bilerp4(gx, r0, i10, r1, i11, wx0, ax, wy0, ay));
        _mm256_storeu_pd(ay_out + i, bilerp4(gy, r0, i10, r1, i11, wx0, ax, wy0, ay));
    }
    for (; i < n; ++i)
        if (!detail::gather2_bounded_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i],
                                         &ax_out[i], &ay_out[i]))
            return i;
    return SIZE_MAX;
}

void axpy_wrap_avx2(double* x, const double* v, double dt, double lo, double len, std::size_t n) {
    double hi = lo + len;
    const __m256d vdt = _mm256_set1_pd(dt), vlo = _mm256_set1_pd(lo);
    const __m256d vlen = _mm256_set1_pd(len), vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d w = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                  _mm256_mul_pd(vdt, _mm256_loadu_pd(v + i)));
        __m256d t = _mm256_div_pd(_mm256_sub_pd(w, vlo), vlen);
        w = _mm256_sub_pd(w, _mm256_mul_pd(_mm256_floor_pd(t), vlen));
        __m256d m = _mm256_cmp_pd(w, vhi, _CMP_GE_OQ);
        w = _mm256_blendv_pd(w, _mm256_sub_pd(w, vlen), m);
        m = _mm256_cmp_pd(w, vlo, _CMP_LT_OQ);
        w = _mm256_blendv_pd(w, _mm256_add_pd(w, vlen), m);
        _mm256_storeu_pd(x + i, w);
    }
    for (; i < n; ++i) x[i] = detail::axpy_wrap_one(x[i], v[i], dt, lo, len, hi);
}

void axpy_avx2(double* x, const double* v, double dt, std::size_t n) {
    const __m256d vdt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d w = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                  _mm256_mul_pd(vdt, _mm256_loadu_pd(v + i)));
        _mm256_storeu_pd(x + i, w);
    }
    for (; i < n; ++i) x[i] = x[i] + dt * v[i];
}

void w4_cell_add_avx2(double* f, const std::ptrdiff_t offx[4], const std::ptrdiff_t offy[4],
                      const std::ptrdiff_t offk[4], std::ptrdiff_t offl0, const double wx[4],
                      const double wy[4], const double wk[4], const double wl[4], double coeff) {
    const __m256d vwl = _mm256_loadu_pd(wl);
    for (int i = 0; i < 4; ++i) {
        double ci = coeff * wx[i];
        for (int j = 0; j < 4; ++j) {
            double cij = ci * wy[j];
            std::ptrdiff_t oij = offx[i] + offy[j];
            for (int k = 0; k < 4; ++k) {
                double c = cij * wk[k];
                double* p = f + oij + offk[k] + offl0;
                __m256d vp = _mm256_loadu_pd(p);
                vp = _mm256_add_pd(vp, _mm256_mul_pd(_mm256_set1_pd(c), vwl));
                _mm256_storeu_pd(p, vp);
            }
        }
    }
}

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace

const Ops* avx2_ops() {
    static const bool have = cpu_has_avx2();
    static const Ops t{"avx2",         gather2_periodic_avx2, gather2_bounded_avx2,
                       axpy_wrap_avx2, axpy_avx2,             w4_cell_add_avx2};
    return have ? &t : nullptr;
}

}  // namespace vp2d::kern
