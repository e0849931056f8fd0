#include "vp2d/problems.hpp"

#include "vp2d/errors.hpp"

#include <cmath>

namespace vp2d {

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::landau: return "landau";
        case ProblemKind::two_stream: return "twostream";
        case ProblemKind::semi_gaussian: return "beam";
    }
    return "?";
}

double landau_f0(double x, double y, double vx, double vy, double alpha, double kx, double ky) {
    return (1.0 / (2.0 * M_PI)) * std::exp(-(vx * vx + vy * vy) / 2.0) *
           (1.0 + alpha * std::cos(kx * x) * std::cos(ky * y));
}

double twostream_f0(double x, double /*y*/, double vx, double vy, double alpha, double kx) {
    return (1.0 / (12.0 * M_PI)) * std::exp(-(vx * vx + vy * vy) / 2.0) *
           (1.0 + alpha * std::cos(kx * x)) * (1.0 + 5.0 * vx * vx);
}

double semigaussian_f0(double x, double y, double vx, double vy, double eta) {
    if (x * x + y * y > 1.0) return 0.0;
    return (4.0 * (1.0 - eta * eta) / (M_PI * eta * eta)) *
           std::exp(-(vx * vx + vy * vy) / 2.0);
}

Vec2 matching_field(double x, double y, double eta) {
    double c = -4.0 / (eta * eta);
    return {c * x, c * y};
}

Vec4 ProblemSpec::domain_lo() const {
    if (kind == ProblemKind::semi_gaussian) return {-xmax, -xmax, -vmax, -vmax};
    return {0.0, 0.0, -vmax, -vmax};
}

Vec4 ProblemSpec::domain_hi() const {
    if (kind == ProblemKind::semi_gaussian) return {xmax, xmax, vmax, vmax};
    return {2.0 * M_PI / kx, 2.0 * M_PI / ky, vmax, vmax};
}

double ProblemSpec::f0(const Vec4& z) const {
    switch (kind) {
        case ProblemKind::landau: return landau_f0(z[0], z[1], z[2], z[3], alpha, kx, ky);
        case ProblemKind::two_stream: return twostream_f0(z[0], z[1], z[2], z[3], alpha, kx);
        case ProblemKind::semi_gaussian: return semigaussian_f0(z[0], z[1], z[2], z[3], eta);
    }
    return 0.0;
}

ExtField ProblemSpec::external_field() const {
    ExtField e;
    if (kind == ProblemKind::semi_gaussian) e.coef = -4.0 / (eta * eta);
    return e;
}

InitSupport ProblemSpec::support_hint(double threshold, double max_cell_volume) const {
    InitSupport h;
    if (kind == ProblemKind::semi_gaussian) {
        h.has_spatial = true;
        h.xlo = {-1.0, -1.0};
        h.xhi = {1.0, 1.0};
    }
    if (threshold <= 0.0) return h;
    // f0 <= A * (1 + 5 vx^2)^[two-stream] * exp(-|v|^2/2): find |v| beyond
    // which A * bound * volume stays under the threshold.
    double A;
    bool bump = false;
    switch (kind) {
        case ProblemKind::landau: A = (1.0 + std::abs(alpha)) / (2.0 * M_PI); break;
        case ProblemKind::two_stream:
            A = (1.0 + std::abs(alpha)) / (12.0 * M_PI);
            bump = true;
            break;
        case ProblemKind::semi_gaussian:
        default: A = 4.0 * (1.0 - eta * eta) / (M_PI * eta * eta); break;
    }
    double c = A * max_cell_volume / threshold;
    if (c <= 1.0) {  // everything is below threshold anyway
        h.has_vcut = true;
        h.vcut = 0.0;
        return h;
    }
    if (!bump) {
        h.has_vcut = true;
        h.vcut = std::sqrt(2.0 * std::log(c)) + 1e-6;
    } else {
        // bound (1 + 5 u) e^{-u/2} with u = |v|^2, monotone beyond u = 1.8
        double ulo = 2.0, uhi = 2.0;
        while ((1.0 + 5.0 * uhi) * std::exp(-uhi / 2.0) * c >= 1.0 && uhi < 1e6) uhi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double um = 0.5 * (ulo + uhi);
            if ((1.0 + 5.0 * um) * std::exp(-um / 2.0) * c >= 1.0)
                ulo = um;
            else
                uhi = um;
        }
        h.has_vcut = true;
        h.vcut = std::sqrt(uhi) + 1e-6;
    }
    return h;
}

double kv_envelope_radius(double K, double k, double emittance) {
    if (k == 0.0) throw NumericsError("kv_envelope_radius: zero focusing strength");
    double disc = std::sqrt(K * K + 4.0 * k * k * emittance * emittance);
    return std::sqrt((K + disc) / (2.0 * k * k));
}

double envelope_residual(double a, double K, double k, double emittance) {
    return k * k * a - K / a - emittance * emittance / (a * a * a);
}

BeamScaling equivalent_beam_scaling(double xrms, double yrms, double vxrms, double vyrms,
                                    double a, double b, double ex, double ey) {
    if (xrms <= 0.0 || yrms <= 0.0 || vxrms <= 0.0 || vyrms <= 0.0)
        throw NumericsError("equivalent_beam_scaling: degenerate RMS input");
    BeamScaling s;
    s.a = a / (2.0 * xrms);
    s.b = b / (2.0 * yrms);
    s.c = ex / (2.0 * s.a * vxrms);
    s.d = ey / (2.0 * s.b * vyrms);
    return s;
}

double rms(const ParticleSet& p, Coord which) {
    if (p.size() == 0) throw NumericsError("rms: empty particle set");
    const std::vector<double>* c = nullptr;
    switch (which) {
        case Coord::x: c = &p.x; break;
        case Coord::y: c = &p.y; break;
        case Coord::vx: c = &p.vx; break;
        case Coord::vy: c = &p.vy; break;
    }
    KahanSum num, den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        num.add(p.q[i] * (*c)[i] * (*c)[i]);
        den.add(p.q[i]);
    }
    double d = den.value();
    if (d == 0.0) throw NumericsError("rms: zero total weight");
    return std::sqrt(num.value() / d);
}

BeamNormalization beam_normalization(double x0, double v0, double vb, double q, double m,
                                     double eps0, double gamma_b) {
    BeamNormalization n;
    n.z0 = x0 * vb / v0;
    n.N0 = eps0 * m * v0 * v0 / (q * q * x0 * x0);
    n.E0 = m * v0 * v0 / (q * x0);
    n.k0 = gamma_b * m * v0 * v0 / (q * x0 * x0);
    return n;
}

F0Moments f0_moments(const ProblemSpec& spec, int n_spatial, int n_velocity) {
    // All built-in distributions factor as S(x,y) * V(vx,vy); moments then
    // come from two 2D quadratures. Product identity: f0(x,y,0,0) ~ S, and
    // f0(x0,y0,vx,vy) ~ V at a spatial point inside the support.
    Vec2 sxlo, sxhi;
    Vec2 ref{0.0, 0.0};  // spatial reference inside the support
    if (spec.kind == ProblemKind::semi_gaussian) {
        sxlo = {-1.0, -1.0};
        sxhi = {1.0, 1.0};
    } else {
        sxlo = {spec.domain_lo()[0], spec.domain_lo()[1]};
        sxhi = {spec.domain_hi()[0], spec.domain_hi()[1]};
    }
    double f00 = spec.f0({ref[0], ref[1], 0.0, 0.0});
    if (f00 <= 0.0) throw NumericsError("f0_moments: reference point outside support");

    double hx = (sxhi[0] - sxlo[0]) / n_spatial;
    double hy = (sxhi[1] - sxlo[1]) / n_spatial;
    KahanSum s0, sx2, sy2;
    for (int j = 0; j < n_spatial; ++j) {
        double y = sxlo[1] + (j + 0.5) * hy;
        for (int i = 0; i < n_spatial; ++i) {
            double x = sxlo[0] + (i + 0.5) * hx;
            double s = spec.f0({x, y, 0.0, 0.0});
            if (s == 0.0) continue;
            s0.add(s);
            sx2.add(s * x * x);
            sy2.add(s * y * y);
        }
    }
    double hv = 2.0 * spec.vmax / n_velocity;
    KahanSum v0s, vx2, vy2;
    for (int j = 0; j < n_velocity; ++j) {
        double vy = -spec.vmax + (j + 0.5) * hv;
        for (int i = 0; i < n_velocity; ++i) {
            double vx = -spec.vmax + (i + 0.5) * hv;
            double v = spec.f0({ref[0], ref[1], vx, vy});
            if (v == 0.0) continue;
            v0s.add(v);
            vx2.add(v * vx * vx);
            vy2.add(v * vy * vy);
        }
    }
    F0Moments m;
    m.xrms = std::sqrt(sx2.value() / s0.value());
    m.yrms = std::sqrt(sy2.value() / s0.value());
    m.vxrms = std::sqrt(vx2.value() / v0s.value());
    m.vyrms = std::sqrt(vy2.value() / v0s.value());
    // charge = (int S dA)(int V dV) / f0(ref,0): both quadratures carry f0's
    // normalization once, so divide the reference value back out.
    m.charge = (s0.value() * hx * hy) * (v0s.value() * hv * hv) / f00;
    return m;
}

KVEquivalent kv_equivalent(double eta, const F0Moments& m) {
    KVEquivalent kv;
    kv.k = 2.0 / eta;
    kv.K = m.charge / (2.0 * M_PI);
    kv.emittance = 4.0 * m.xrms * m.vxrms;
    kv.radius = kv_envelope_radius(kv.K, kv.k, kv.emittance);
    kv.xrms_target = kv.radius / 2.0;
    kv.vxrms_target = kv.emittance / (2.0 * kv.radius);
    return kv;
}

}  // namespace vp2d
