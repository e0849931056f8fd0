#pragma once

#include "vp2d/geom.hpp"
#include "vp2d/particles.hpp"

#include <string>

namespace vp2d {

enum class ProblemKind { landau, two_stream, semi_gaussian };

std::string to_string(ProblemKind k);

// Initial distributions, normalized units.
double landau_f0(double x, double y, double vx, double vy, double alpha, double kx, double ky);
double twostream_f0(double x, double y, double vx, double vy, double alpha, double kx);
double semigaussian_f0(double x, double y, double vx, double vy, double eta);

// Uniform linear focusing field E^e = -(4/eta^2)(x, y).
Vec2 matching_field(double x, double y, double eta);

struct ProblemSpec {
    ProblemKind kind = ProblemKind::landau;
    double alpha = 0.05;
    double kx = 0.5;
    double ky = 0.5;
    double vmax = 6.0;
    double eta = 0.5;    // beam tune depression
    double xmax = 10.0;  // beam spatial half-width

    bool periodic() const { return kind != ProblemKind::semi_gaussian; }
    int species_sign() const { return kind == ProblemKind::semi_gaussian ? 0 : 1; }

    Vec4 domain_lo() const;
    Vec4 domain_hi() const;

    double f0(const Vec4& z) const;
    ExtField external_field() const;

    // Conservative quiet-start bounds: cells outside are below the drop
    // threshold (threshold > 0) or outside the support. max_cell_volume is the
    // largest cell volume in the hierarchy.
    InitSupport support_hint(double threshold, double max_cell_volume) const;
};

// Matched K-V envelope radius, a = sqrt((K + sqrt(K^2 + 4 k^2 e^2)) / (2 k^2)).
double kv_envelope_radius(double K, double k, double emittance);

// Stationary envelope residual k^2 a - K/a - e^2/a^3 (zero at the matched radius).
double envelope_residual(double a, double K, double k, double emittance);

// Scale factors making f'(x/a', y/b', vx/c', vy/d') share the K-V beam's RMS:
// a' = a/(2 xrms), b' = b/(2 yrms), c' = ex/(2 a' vxrms), d' = ey/(2 b' vyrms).
struct BeamScaling {
    double a, b, c, d;
};
BeamScaling equivalent_beam_scaling(double xrms, double yrms, double vxrms, double vyrms,
                                    double a, double b, double ex, double ey);

enum class Coord { x, y, vx, vy };
double rms(const ParticleSet& p, Coord which);

// Normalization constants for the physical-parameter path; the simulation
// itself consumes only normalized quantities.
struct BeamNormalization {
    double z0;  // x0 vb / v0
    double N0;  // eps0 m v0^2 / (q^2 x0^2)
    double E0;  // m v0^2 / (q x0)
    double k0;  // gamma_b m v0^2 / (q x0^2)
};
BeamNormalization beam_normalization(double x0, double v0, double vb, double q, double m,
                                     double eps0, double gamma_b);

// Product-form moments of f0 by 2D midpoint quadrature (all built-in
// distributions factor into spatial * velocity parts).
struct F0Moments {
    double charge;
    double xrms, yrms, vxrms, vyrms;
};
F0Moments f0_moments(const ProblemSpec& spec, int n_spatial, int n_velocity);

// Equivalent K-V beam targets in normalized units, derived from the tune
// depression and the initial distribution's moments: focusing k = 2/eta,
// perveance K = charge/(2 pi), emittance 4 * xrms * vxrms.
struct KVEquivalent {
    double k, K, emittance, radius;
    double xrms_target, vxrms_target;
};
KVEquivalent kv_equivalent(double eta, const F0Moments& m);

}  // namespace vp2d
