#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vp2d/poisson_periodic.hpp"
#include "vp2d/errors.hpp"

#include <cmath>
#include <random>

using namespace vp2d;

namespace {

FieldGeom2D geom(int n, double L) {
    FieldGeom2D g;
    g.nx = g.ny = n;
    g.spacing = {L / n, L / n};
    g.origin = {0.0, 0.0};
    g.periodic = true;
    return g;
}

// -Lap_h applied to phi on the periodic grid.
ScalarGrid2D apply_5pt(const ScalarGrid2D& phi) {
    const FieldGeom2D& g = phi.g;
    ScalarGrid2D out(g);
    double sx = 1.0 / (g.spacing[0] * g.spacing[0]);
    double sy = 1.0 / (g.spacing[1] * g.spacing[1]);
    for (int j = 0; j < g.ny; ++j) {
        int jm = j == 0 ? g.ny - 1 : j - 1;
        int jp = j == g.ny - 1 ? 0 : j + 1;
        for (int i = 0; i < g.nx; ++i) {
            int im = i == 0 ? g.nx - 1 : i - 1;
            int ip = i == g.nx - 1 ? 0 : i + 1;
            out.at(i, j) = (2 * phi.at(i, j) - phi.at(im, j) - phi.at(ip, j)) * sx +
                           (2 * phi.at(i, j) - phi.at(i, jm) - phi.at(i, jp)) * sy;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("discrete eigenfunction: cos mode on a 4x4 unit grid") {
    // lambda = 2 - 2cos(pi/2) = 2, so phi = rhs / 2
    PeriodicPoissonOp op(4, 4, {1.0, 1.0}, false);
    ScalarGrid2D rhs(geom(4, 4.0)), phi;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) rhs.at(i, j) = std::cos(2.0 * M_PI * i / 4.0);
    op.solve(rhs, phi);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            CHECK(phi.at(i, j) == doctest::Approx(rhs.at(i, j) / 2.0).epsilon(1e-13));
}

TEST_CASE("zero rhs gives zero phi; nonzero mean is rejected") {
    PeriodicPoissonOp op(8, 8, {0.5, 0.5}, false);
    ScalarGrid2D rhs(geom(8, 4.0)), phi;
    op.solve(rhs, phi);
    for (double v : phi.a) CHECK(v == 0.0);

    rhs.fill(0.25);
    CHECK_THROWS_AS(op.solve(rhs, phi), NumericsError);

    PeriodicPoissonOp neutral(8, 8, {0.5, 0.5}, true);
    neutral.solve(rhs, phi);  // background removes the mean
    for (double v : phi.a) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("operator round trip recovers a manufactured solution") {
    int n = 32;
    ScalarGrid2D star(geom(n, 2.0 * M_PI));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            star.at(i, j) = std::sin(star.g.node_x(i)) * std::sin(star.g.node_y(j));
    ScalarGrid2D rhs = apply_5pt(star);
    PeriodicPoissonOp op(n, n, star.g.spacing, false);
    ScalarGrid2D phi;
    op.solve(rhs, phi);
    double rmax = 0, emax = 0;
    for (std::size_t k = 0; k < phi.a.size(); ++k) emax = std::max(emax, std::abs(phi.a[k] - star.a[k]));
    for (double v : rhs.a) rmax = std::max(rmax, std::abs(v));
    CHECK(emax < 1e-10);
    CHECK(periodic_residual_linf(phi, rhs) < 1e-10 * rmax);
}

TEST_CASE("second-order convergence against the smooth solution") {
    // -Lap phi = 2 sin x sin y on [0,2pi]^2 has phi = sin x sin y
    double err[3];
    int k = 0;
    for (int n : {16, 32, 64}) {
        ScalarGrid2D rhs(geom(n, 2.0 * M_PI)), phi;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                rhs.at(i, j) = 2.0 * std::sin(rhs.g.node_x(i)) * std::sin(rhs.g.node_y(j));
        PeriodicPoissonOp op(n, n, rhs.g.spacing, false);
        op.solve(rhs, phi);
        double e = 0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                e = std::max(e, std::abs(phi.at(i, j) -
                                         std::sin(phi.g.node_x(i)) * std::sin(phi.g.node_y(j))));
        err[k++] = e;
    }
    double q1 = std::log2(err[0] / err[1]);
    double q2 = std::log2(err[1] / err[2]);
    CHECK(q1 > 1.9);
    CHECK(q1 < 2.1);
    CHECK(q2 > 1.9);
    CHECK(q2 < 2.1);
}

TEST_CASE("reflection symmetry of the rhs is preserved") {
    int n = 16;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarGrid2D rhs(geom(n, 1.0)), phi;
    // build an rhs symmetric under i -> n-i (mod n), zero mean
    for (int j = 0; j < n; ++j)
        for (int i = 1; i <= n / 2; ++i) {
            double v = uni(rng);
            rhs.at(i, j) = v;
            rhs.at((n - i) % n, j) = v;
        }
    double mean = 0;
    for (double v : rhs.a) mean += v;
    mean /= rhs.a.size();
    for (double& v : rhs.a) v -= mean;
    PeriodicPoissonOp op(n, n, rhs.g.spacing, true);
    op.solve(rhs, phi);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            CHECK(phi.at(i, j) == doctest::Approx(phi.at((n - i) % n, j)).epsilon(1e-11));
}

TEST_CASE("compute_E central differences") {
    // constant phi -> zero field
    ScalarGrid2D phi(geom(4, 4.0));
    phi.fill(3.0);
    VecGrid2D E;
    compute_E_periodic(phi, E);
    for (double v : E.x) CHECK(v == 0.0);
    for (double v : E.y) CHECK(v == 0.0);

    // nodes (0, 1, 0, -1) along x: E_x at j=0 is (phi_3 - phi_1)/2 = -1
    double pat[4] = {0.0, 1.0, 0.0, -1.0};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) phi.at(i, j) = pat[i];
    compute_E_periodic(phi, E);
    CHECK(E.x[E.g.idx(0, 0)] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(E.x[E.g.idx(1, 0)] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(E.y[E.g.idx(1, 2)] == 0.0);
}
