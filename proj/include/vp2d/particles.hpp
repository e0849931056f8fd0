#pragma once

#include "vp2d/field_grid.hpp"
#include "vp2d/phase_grid.hpp"
#include "vp2d/workers.hpp"

#include <functional>
#include <vector>

namespace vp2d {

// Structure-of-arrays particle storage. Weights carry f * cell volume;
// particles below the drop threshold are never stored.
struct ParticleSet {
    std::vector<double> x, y, vx, vy, q;
    int species_sign = 0;  // 0 for positive charges, 1 for negative

    std::size_t size() const { return q.size(); }
    void clear() {
        x.clear(); y.clear(); vx.clear(); vy.clear(); q.clear();
    }
    void reserve(std::size_t n) {
        x.reserve(n); y.reserve(n); vx.reserve(n); vy.reserve(n); q.reserve(n);
    }
    void append(double px, double py, double pvx, double pvy, double w) {
        x.push_back(px); y.push_back(py); vx.push_back(pvx); vy.push_back(pvy); q.push_back(w);
    }
    double total_charge() const;  // compensated sum
    double charge_sign() const { return species_sign == 0 ? 1.0 : -1.0; }
};

// Conservative iteration bounds for quiet-start initialization: cells outside
// are guaranteed below the drop threshold (or outside the f0 support).
struct InitSupport {
    bool has_spatial = false;
    Vec2 xlo{}, xhi{};
    bool has_vcut = false;
    double vcut = 0.0;  // skip cells whose center has vx^2+vy^2 > vcut^2
};

// One particle per valid cell at the cell center, q = f0(center) * volume,
// dropping |q| < threshold.
ParticleSet quiet_start_init(const CompositeGrid& grid,
                             const std::function<double(const Vec4&)>& f0, double threshold,
                             int species_sign, const InitSupport& hint = {});

// Per-chunk private accumulation grids, merged in chunk order so deposits are
// bitwise independent of the worker count.
struct DepositScratch {
    std::vector<std::vector<double>> bufs;
};

// Cloud-in-cell charge assignment: rho_j += q * u1 * u1 / (ex*ey). Periodic
// grids wrap; on bounded grids a particle outside the node support throws.
void deposit_u1(const double* px, const double* py, const double* q, std::size_t n,
                ScalarGrid2D& rho, WorkerPool& pool, DepositScratch& scratch);

// Field interpolation with the identical kernel (avoids self-force).
void gather_field(const VecGrid2D& E, const double* px, const double* py, std::size_t n,
                  double* ax, double* ay, WorkerPool& pool);

// Single-point convenience wrapper.
Vec2 gather_field_at(const VecGrid2D& E, double px, double py);

// Uniform linear external field E = coef * (x, y); coef = 0 disables it.
struct ExtField {
    double coef = 0.0;
};

struct StepScratch {
    std::vector<double> xm, ym, vxm, vym, ax, ay;
};

// Periodic spatial domain for position wrapping; periodic=false leaves
// positions unwrapped (free-space problems).
struct SpatialDomain {
    double lox = 0.0, loy = 0.0, Lx = 0.0, Ly = 0.0;
    bool periodic = true;
};

// Midpoint RK2 with re-deposit and re-solve at the half step. E1 is the field
// at the current particle state; solve_mid returns the field for arbitrary
// positions (it deposits and solves internally). Weights are untouched.
void rk2_step(ParticleSet& p, const SpatialDomain& dom, const VecGrid2D& E1,
              const std::function<const VecGrid2D&(const double* x, const double* y,
                                                   const double* q, std::size_t n)>& solve_mid,
              const ExtField& ext, double dt, WorkerPool& pool, StepScratch& ws);

}  // namespace vp2d
