#pragma once

#include "vp2d/field_grid.hpp"
#include "vp2d/workers.hpp"

#include <memory>
#include <vector>

namespace vp2d {

// 2D free-space Green's function of -Lap: G(r) = -(1/2pi) ln|r|.
double greens_log(double rx, double ry);

// -Lap_h phi = rhs on a bounded node grid with Dirichlet values on the
// boundary ring, solved by sine-transform diagonalization of the 5-point
// operator after lifting the boundary into the RHS.
class DirichletPoissonOp {
  public:
    // Total nodes per dimension, boundary ring included (>= 4 each).
    DirichletPoissonOp(int nx, int ny, Vec2 spacing);
    ~DirichletPoissonOp();

    DirichletPoissonOp(const DirichletPoissonOp&) = delete;
    DirichletPoissonOp& operator=(const DirichletPoissonOp&) = delete;

    // rhs interior values are used; boundary may be null (homogeneous) or a
    // full-size grid whose ring holds the Dirichlet values. phi gets the full
    // grid including the ring.
    void solve(const ScalarGrid2D& rhs, const ScalarGrid2D* boundary, ScalarGrid2D& phi) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SurfaceSample {
    Vec2 pos;
    double strength;  // single-layer density: -dphi/dn (inward one-sided difference)
    double weight;    // arc length share; weights sum to the perimeter
};

struct SurfaceCharge {
    std::vector<SurfaceSample> samples;
    double total() const;  // sum strength * weight, equals the enclosed charge
};

// Surface charge on the boundary ring of a homogeneous-Dirichlet solution.
// Throws if phi does not vanish on the ring.
SurfaceCharge surface_charge(const ScalarGrid2D& phi1);

// Direct boundary-to-boundary convolution: out[t] = sum_s G(t-p_s) q_s w_s.
// A target coinciding with a source is a singular-kernel error.
std::vector<double> boundary_convolution(const SurfaceCharge& src, const std::vector<Vec2>& targets,
                                         WorkerPool& pool);

struct FreespacePadding {
    int pad1 = 2;      // D1 = D0 grown this many cells per side
    int pad2_div = 4;  // D2 = D1 grown by max(2, n1/pad2_div) cells per side
};

// Infinite-domain solve via two Dirichlet problems bridged by the boundary
// convolution: homogeneous solve on D1, surface charge on its ring, Green's
// convolution to the D2 ring, inhomogeneous solve on D2. Potentials follow
// the bare log kernel; compare values only after subtracting a reference.
class FreespaceSolver {
  public:
    FreespaceSolver(const FieldGeom2D& d0, FreespacePadding pad, WorkerPool& pool);
    ~FreespaceSolver();

    FreespaceSolver(const FreespaceSolver&) = delete;
    FreespaceSolver& operator=(const FreespaceSolver&) = delete;

    // rhs lives on D0 (bounded grid) and must be compactly supported there.
    void solve(const ScalarGrid2D& rhs_d0);

    const ScalarGrid2D& phi_d2() const;
    const FieldGeom2D& d2_geom() const;

    double phi_at_d0_node(int i, int j) const;

    // Central-difference field on the D0 nodes, pulling neighbors from D2.
    void compute_E_on_d0(VecGrid2D& E) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Max-norm residual of the interior 5-point equation (test support).
double dirichlet_residual_linf(const ScalarGrid2D& phi, const ScalarGrid2D& rhs);

}  // namespace vp2d
