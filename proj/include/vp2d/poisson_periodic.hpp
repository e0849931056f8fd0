#pragma once

#include "vp2d/field_grid.hpp"

#include <memory>

namespace vp2d {

// Solves -Lap_h phi = rhs on a periodic node grid by diagonalizing the exact
// 5-point operator in Fourier space, symbol
//   lam(m,p) = (2-2cos(2 pi m/nx))/ex^2 + (2-2cos(2 pi p/ny))/ey^2,
// so the result is the finite-difference solution, not the spectral one.
// The mean of phi is fixed to zero.
class PeriodicPoissonOp {
  public:
    // n even and >= 4 in both dimensions. With neutralizing=true the mean of
    // the RHS is removed (background charge chosen as minus the mean);
    // otherwise a RHS with nonzero mean is a solvability error.
    PeriodicPoissonOp(int nx, int ny, Vec2 spacing, bool neutralizing);
    ~PeriodicPoissonOp();

    PeriodicPoissonOp(const PeriodicPoissonOp&) = delete;
    PeriodicPoissonOp& operator=(const PeriodicPoissonOp&) = delete;

    void solve(const ScalarGrid2D& rhs, ScalarGrid2D& phi) const;

    int nx() const;
    int ny() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// E_j^d = (phi_{j-e^d} - phi_{j+e^d}) / (2 eps_d), periodic wrap.
void compute_E_periodic(const ScalarGrid2D& phi, VecGrid2D& E);

// Max-norm of (-Lap_h phi) - rhs on the periodic grid (test support).
double periodic_residual_linf(const ScalarGrid2D& phi, const ScalarGrid2D& rhs);

}  // namespace vp2d
