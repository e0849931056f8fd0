#include "vp2d/poisson_periodic.hpp"

#include "vp2d/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

namespace vp2d {

struct PeriodicPoissonOp::Impl {
    int nx, ny;
    Vec2 eps;
    bool neutralizing;
    std::vector<double> inv_lambda;  // ny x (nx/2+1), zero at the mean mode
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    mutable std::mutex mu;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
};

PeriodicPoissonOp::PeriodicPoissonOp(int nx, int ny, Vec2 spacing, bool neutralizing)
    : impl_(new Impl) {
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
        throw ConfigError("periodic poisson: grid must be even and >= 4 per dimension");
    impl_->nx = nx;
    impl_->ny = ny;
    impl_->eps = spacing;
    impl_->neutralizing = neutralizing;

    const int nkx = nx / 2 + 1;
    impl_->real = fftw_alloc_real(std::size_t(nx) * ny);
    impl_->spec = fftw_alloc_complex(std::size_t(ny) * nkx);
    impl_->fwd = fftw_plan_dft_r2c_2d(ny, nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_2d(ny, nx, impl_->spec, impl_->real, FFTW_ESTIMATE);

    impl_->inv_lambda.resize(std::size_t(ny) * nkx);
    const double sx = 1.0 / (spacing[0] * spacing[0]);
    const double sy = 1.0 / (spacing[1] * spacing[1]);
    const double norm = 1.0 / (double(nx) * double(ny));
    for (int my = 0; my < ny; ++my) {
        for (int kx = 0; kx < nkx; ++kx) {
            double lam = (2.0 - 2.0 * std::cos(2.0 * M_PI * kx / nx)) * sx +
                         (2.0 - 2.0 * std::cos(2.0 * M_PI * my / ny)) * sy;
            impl_->inv_lambda[std::size_t(my) * nkx + kx] = lam > 0.0 ? norm / lam : 0.0;
        }
    }
}

PeriodicPoissonOp::~PeriodicPoissonOp() = default;
int PeriodicPoissonOp::nx() const { return impl_->nx; }
int PeriodicPoissonOp::ny() const { return impl_->ny; }

void PeriodicPoissonOp::solve(const ScalarGrid2D& rhs, ScalarGrid2D& phi) const {
    Impl& s = *impl_;
    if (rhs.g.nx != s.nx || rhs.g.ny != s.ny || !rhs.g.periodic)
        throw ConfigError("periodic poisson: rhs grid does not match the operator");

    if (!s.neutralizing) {
        KahanSum mean;
        double amax = 0.0;
        for (double v : rhs.a) {
            mean.add(v);
            amax = std::max(amax, std::abs(v));
        }
        double m = mean.value() / double(rhs.a.size());
        if (std::abs(m) > 1e-12 * std::max(amax, 1e-300))
            throw NumericsError("periodic poisson: RHS has nonzero mean and no neutralizing background");
    }

    std::lock_guard<std::mutex> lk(s.mu);
    const std::size_t n = rhs.a.size();
    for (std::size_t i = 0; i < n; ++i) s.real[i] = rhs.a[i];
    fftw_execute(s.fwd);
    const int nkx = s.nx / 2 + 1;
    for (std::size_t k = 0; k < std::size_t(s.ny) * nkx; ++k) {
        s.spec[k][0] *= s.inv_lambda[k];
        s.spec[k][1] *= s.inv_lambda[k];
    }
    fftw_execute(s.bwd);
    phi.g = rhs.g;
    phi.a.resize(n);
    for (std::size_t i = 0; i < n; ++i) phi.a[i] = s.real[i];
}

void compute_E_periodic(const ScalarGrid2D& phi, VecGrid2D& E) {
    const FieldGeom2D& g = phi.g;
    E.g = g;
    E.x.resize(g.size());
    E.y.resize(g.size());
    const double cx = 1.0 / (2.0 * g.spacing[0]);
    const double cy = 1.0 / (2.0 * g.spacing[1]);
    for (int j = 0; j < g.ny; ++j) {
        int jm = j == 0 ? g.ny - 1 : j - 1;
        int jp = j == g.ny - 1 ? 0 : j + 1;
        for (int i = 0; i < g.nx; ++i) {
            int im = i == 0 ? g.nx - 1 : i - 1;
            int ip = i == g.nx - 1 ? 0 : i + 1;
            E.x[g.idx(i, j)] = (phi.at(im, j) - phi.at(ip, j)) * cx;
            E.y[g.idx(i, j)] = (phi.at(i, jm) - phi.at(i, jp)) * cy;
        }
    }
}

double periodic_residual_linf(const ScalarGrid2D& phi, const ScalarGrid2D& rhs) {
    const FieldGeom2D& g = phi.g;
    const double sx = 1.0 / (g.spacing[0] * g.spacing[0]);
    const double sy = 1.0 / (g.spacing[1] * g.spacing[1]);
    double r = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        int jm = j == 0 ? g.ny - 1 : j - 1;
        int jp = j == g.ny - 1 ? 0 : j + 1;
        for (int i = 0; i < g.nx; ++i) {
            int im = i == 0 ? g.nx - 1 : i - 1;
            int ip = i == g.nx - 1 ? 0 : i + 1;
            double lap = (2.0 * phi.at(i, j) - phi.at(im, j) - phi.at(ip, j)) * sx +
                         (2.0 * phi.at(i, j) - phi.at(i, jm) - phi.at(i, jp)) * sy;
            r = std::max(r, std::abs(lap - rhs.at(i, j)));
        }
    }
    return r;
}

}  // namespace vp2d
