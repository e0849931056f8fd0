#pragma once

#include "vp2d/field_grid.hpp"
#include "vp2d/particles.hpp"

#include <utility>
#include <vector>

namespace vp2d {

struct TimeSample {
    double t = 0;
    double ex_l2 = 0;
    double ex_linf = 0;
    double ey_l2 = 0;
    double total_q = 0;
    double rms_x = 0;
    double rms_vx = 0;
    double min_f = 0;  // min f at the most recent remap (0 before the first)
};

struct TimeSeries {
    std::vector<TimeSample> rows;
};

// Per-component L2 norm sqrt(sum E^2 * ex * ey) over the grid nodes.
std::pair<double, double> field_amplitude(const VecGrid2D& E);
std::pair<double, double> field_linf(const VecGrid2D& E);

// Least-squares slope of ln(peak amplitude) against peak time over strict
// local maxima of the Ex amplitude inside [t0, t1] (minimum peak separation
// of 3 samples). A window with no oscillation (zero peaks) falls back to the
// slope over all samples; one or two peaks is a fit error.
double fit_damping_rate(const TimeSeries& ts, double t0, double t1);

// e^h per direction: max over coincident nodes of |E_fine - E_coarse|; the
// fine grid must be exactly twice the coarse resolution.
Vec2 richardson_error(const VecGrid2D& fine, const VecGrid2D& coarse);

// q = min_d log2(|e2h_d| / |eh_d|).
double convergence_order(const Vec2& e2h, const Vec2& eh);

// Projection grid for F(x, vx): x periodic with nx nodes spacing Lx/nx,
// vx bounded with nvx nodes spanning [v0, v0 + (nvx-1)*dv].
struct ProjectionSpec {
    int nx = 0;
    double x0 = 0, dx = 0;
    int nvx = 0;
    double v0 = 0, dv = 0;
};

struct Projection {
    ProjectionSpec spec;
    std::vector<double> F;       // nvx rows by nx columns, x fastest
    std::int64_t clamped = 0;    // particles whose vx fell outside the range
};

// Deposit each particle's full weight onto the (x, vx) plane with the
// tensor-product u1 kernel, divided by the cell area; out-of-range vx mass
// goes to the nearest edge row and is counted.
Projection project_xvx(const ParticleSet& p, const ProjectionSpec& spec);

}  // namespace vp2d
