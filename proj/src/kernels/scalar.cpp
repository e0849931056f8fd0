#include "kernels_impl.hpp"
#include "vp2d/kernels.hpp"

namespace vp2d::kern {
namespace {

void gather2_periodic_scalar(const double* gx, const double* gy, int nx, int ny, double ox,
                             double oy, double inv_ex, double inv_ey, const double* px,
                             const double* py, double* ax, double* ay, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        detail::gather2_periodic_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i], &ax[i],
                                     &ay[i]);
}

std::size_t gather2_bounded_scalar(const double* gx, const double* gy, int nx, int ny, double ox,
                                   double oy, double inv_ex, double inv_ey, const double* px,
                                   const double* py, double* ax, double* ay, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!detail::gather2_bounded_one(gx, gy, nx, ny, ox, oy, inv_ex, inv_ey, px[i], py[i],
                                         &ax[i], &ay[i]))
            return i;
    return SIZE_MAX;
}

void axpy_wrap_scalar(double* x, const double* v, double dt, double lo, double len,
                      std::size_t n) {
    double hi = lo + len;
    for (std::size_t i = 0; i < n; ++i) x[i] = detail::axpy_wrap_one(x[i], v[i], dt, lo, len, hi);
}

void axpy_scalar(double* x, const double* v, double dt, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] + dt * v[i];
}

void w4_cell_add_scalar(double* f, const std::ptrdiff_t offx[4], const std::ptrdiff_t offy[4],
                        const std::ptrdiff_t offk[4], std::ptrdiff_t offl0, const double wx[4],
                        const double wy[4], const double wk[4], const double wl[4], double coeff) {
    for (int i = 0; i < 4; ++i) {
        double ci = coeff * wx[i];
        for (int j = 0; j < 4; ++j) {
            double cij = ci * wy[j];
            std::ptrdiff_t oij = offx[i] + offy[j];
            for (int k = 0; k < 4; ++k) {
                double c = cij * wk[k];
                double* p = f + oij + offk[k] + offl0;
                p[0] += c * wl[0];
                p[1] += c * wl[1];
                p[2] += c * wl[2];
                p[3] += c * wl[3];
            }
        }
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops t{"scalar",     gather2_periodic_scalar, gather2_bounded_scalar,
                       axpy_wrap_scalar, axpy_scalar,         w4_cell_add_scalar};
    return t;
}

}  // namespace vp2d::kern
