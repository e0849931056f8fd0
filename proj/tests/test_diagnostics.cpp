#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vp2d/diagnostics.hpp"
#include "vp2d/errors.hpp"

#include <cmath>

using namespace vp2d;

namespace {

VecGrid2D grid_with(int n, double L, double ex_val) {
    FieldGeom2D g;
    g.nx = g.ny = n;
    g.spacing = {L / n, L / n};
    g.origin = {0, 0};
    g.periodic = true;
    VecGrid2D E(g);
    for (double& v : E.x) v = ex_val;
    return E;
}

TimeSeries synthetic(double gamma, double omega, double dt, double t1) {
    TimeSeries ts;
    for (double t = 0.0; t <= t1 + 1e-12; t += dt) {
        TimeSample s;
        s.t = t;
        s.ex_l2 = std::exp(gamma * t) * std::abs(std::cos(omega * t));
        if (s.ex_l2 == 0.0) s.ex_l2 = 1e-300;
        ts.rows.push_back(s);
    }
    return ts;
}

}  // namespace

TEST_CASE("field amplitude norms") {
    VecGrid2D zero = grid_with(16, 2.0, 0.0);
    auto a = field_amplitude(zero);
    CHECK(a.first == 0.0);
    CHECK(a.second == 0.0);

    // uniform Ex = c on area A: L2 = c sqrt(A)
    VecGrid2D uni = grid_with(16, 2.0, 0.75);
    a = field_amplitude(uni);
    CHECK(a.first == doctest::Approx(0.75 * 2.0).epsilon(1e-13));  // sqrt(4) = 2
    CHECK(field_linf(uni).first == 0.75);

    // Ex = sin(x) on [0,2pi]^2 at 64^2: sqrt(2 pi^2)
    FieldGeom2D g;
    g.nx = g.ny = 64;
    g.spacing = {2 * M_PI / 64, 2 * M_PI / 64};
    g.origin = {0, 0};
    g.periodic = true;
    VecGrid2D E(g);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) E.x[g.idx(i, j)] = std::sin(g.node_x(i));
    a = field_amplitude(E);
    CHECK(a.first == doctest::Approx(std::sqrt(2.0 * M_PI * M_PI)).epsilon(1e-3));
}

TEST_CASE("damping-rate fit on synthetic signals") {
    // peaks of e^{gamma t}|cos(pi t)| land exactly on the sample grid (dt = 1/8)
    double g1 = fit_damping_rate(synthetic(-0.394, M_PI, 0.125, 20.0), 0.0, 20.0);
    CHECK(g1 == doctest::Approx(-0.394).epsilon(1e-6));

    TimeSeries flat;
    for (int i = 0; i < 100; ++i) flat.rows.push_back({i * 0.125, 0, 0, 0, 0, 0, 0, 0});
    for (auto& r : flat.rows) r.ex_l2 = 2.5;
    CHECK(fit_damping_rate(flat, 0.0, 100.0) == doctest::Approx(0.0).epsilon(1e-12));

    double g2 = fit_damping_rate(synthetic(0.2, M_PI, 0.125, 20.0), 0.0, 20.0);
    CHECK(g2 == doctest::Approx(0.2).epsilon(1e-6));

    TimeSeries short_ts = synthetic(-0.3, M_PI, 0.125, 1.6);  // only 1-2 peaks
    CHECK_THROWS_AS(fit_damping_rate(short_ts, 0.0, 1.6), NumericsError);
}

TEST_CASE("richardson error and convergence order") {
    VecGrid2D coarse = grid_with(8, 2.0, 0.0);
    VecGrid2D fine = grid_with(16, 2.0, 0.0);
    // identical (zero) fields
    Vec2 e = richardson_error(fine, coarse);
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 0.0);
    // one coincident node differs by 1e-3
    fine.x[fine.g.idx(4, 6)] += 1e-3;  // maps to coarse node (2,3)
    fine.y[fine.g.idx(3, 6)] += 5e-2;  // odd index: not coincident
    e = richardson_error(fine, coarse);
    CHECK(e[0] == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(e[1] == 0.0);

    // constructed h^2 pattern: E^h = x^2, E^2h = x^2 + h^2
    VecGrid2D f2 = grid_with(16, 2.0, 0.0), c2 = grid_with(8, 2.0, 0.0);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) f2.x[f2.g.idx(i, j)] = f2.g.node_x(i) * f2.g.node_x(i);
    double h2 = 0.04;
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i)
            c2.x[c2.g.idx(i, j)] = c2.g.node_x(i) * c2.g.node_x(i) + h2;
    Vec2 eh = richardson_error(f2, c2);
    CHECK(eh[0] == doctest::Approx(h2).epsilon(1e-12));

    CHECK(convergence_order({4e-3, 4e-3}, {1e-3, 1e-3}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(convergence_order({2e-3, 2e-3}, {1e-3, 1e-3}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(convergence_order({4e-3, 2e-3}, {1e-3, 1e-3}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(convergence_order({0.0, 1e-3}, {1e-3, 1e-3}), NumericsError);

    VecGrid2D mis = grid_with(12, 2.0, 0.0);
    CHECK_THROWS_AS(richardson_error(mis, coarse), NumericsError);
}

TEST_CASE("x-vx projection conserves charge") {
    ProjectionSpec spec;
    spec.nx = 16;
    spec.x0 = 0.0;
    spec.dx = 0.5;
    spec.nvx = 17;
    spec.v0 = -4.0;
    spec.dv = 0.5;

    ParticleSet p;
    p.species_sign = 1;
    // single particle exactly on a projection node
    p.append(2.0, 0.0, -2.0, 0.0, 1.0);
    Projection pr = project_xvx(p, spec);
    CHECK(pr.F[std::size_t(4) * 16 + 4] == doctest::Approx(1.0 / 0.25).epsilon(1e-13));
    KahanSum s;
    for (double v : pr.F) s.add(v * 0.25);
    CHECK(s.value() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(pr.clamped == 0);

    // random cloud conserves; out-of-range vx clamps to the edge and is flagged
    p.clear();
    std::size_t n = 1000;
    for (std::size_t i = 0; i < n; ++i) {
        double fi = double(i);
        p.append(std::fmod(0.37 * fi, 8.0), 0.0, std::fmod(0.61 * fi, 12.0) - 6.0, 0.0,
                 0.001 * (1.0 + std::sin(fi)));
    }
    pr = project_xvx(p, spec);
    KahanSum tot, qs;
    for (double v : pr.F) tot.add(v * 0.25);
    for (double v : p.q) qs.add(v);
    CHECK(tot.value() == doctest::Approx(qs.value()).epsilon(1e-12));
    CHECK(pr.clamped > 0);
}
