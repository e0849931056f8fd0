#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vp2d/remap.hpp"
#include "vp2d/kernels.hpp"

#include <array>
#include <cmath>
#include <map>
#include <random>

using namespace vp2d;

namespace {

CompositeGrid flat_grid(int n, double half = 1.0) {
    return CompositeGrid::build({-half, -half, -half, -half}, {half, half, half, half},
                                {n, n, n, n}, {});
}

CompositeGrid refined_grid(int n) {
    // [-2,2]^4, velocity refined on [-1,1]^2 at ratio 2
    RefinementSpec r;
    r.lo = {-2, -2, -1, -1};
    r.hi = {2, 2, 1, 1};
    r.ratio = {1, 1, 2, 2};
    return CompositeGrid::build({-2, -2, -2, -2}, {2, 2, 2, 2}, {n, n, n, n}, {r});
}

std::vector<Box4> full_windows(const CompositeGrid& g) {
    std::vector<Box4> w;
    for (int l = 0; l < g.num_levels(); ++l) {
        Box4 b;
        b.lo = {0, 0, 0, 0};
        for (int d = 0; d < kDim; ++d) b.hi[d] = g.level(l).ncells[d] - 1;
        w.push_back(b);
    }
    return w;
}

}  // namespace

TEST_CASE("single particle deposit conserves charge and is a delta at a center") {
    CompositeGrid g = flat_grid(8);
    CompositeField f(g, false, false);
    ParticleSet p;
    p.species_sign = 1;

    // at a cell center the W4 stencil collapses to the cell itself
    Vec4 c = g.cell_center(CellId{0, {3, 4, 2, 5}});
    p.append(c[0], c[1], c[2], c[3], 0.7);
    double lost = 0;
    deposit_w4_composite(p, f, &lost);
    CHECK(lost == 0.0);
    CHECK(f.charge_total() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(f.win(0).at({3, 4, 2, 5}) == doctest::Approx(0.7 / g.cell_volume(0)).epsilon(1e-14));

    // off-center: full 4^4 stencil, still conservative, some lobes negative
    ParticleSet q;
    q.species_sign = 1;
    q.append(c[0] + 0.07, c[1] - 0.03, c[2] + 0.11, c[3] + 0.02, 0.7);
    deposit_w4_composite(q, f, &lost);
    CHECK(lost == 0.0);
    CHECK(f.charge_total() == doctest::Approx(0.7).epsilon(1e-13));
    double minf = 0;
    for (double v : f.win(0).f) minf = std::min(minf, v);
    CHECK(minf < 0.0);
}

TEST_CASE("deposit truncated at the velocity boundary goes to the lost ledger") {
    CompositeGrid g = flat_grid(8);
    CompositeField f(g, false, false);
    ParticleSet p;
    p.species_sign = 1;
    // vx within half a cell of the domain edge: stencil sticks out
    p.append(0.0, 0.0, 0.99, 0.0, 1.0);
    double lost = 0;
    deposit_w4_composite(p, f, &lost);
    CHECK(lost != 0.0);
    CHECK(f.charge_total() + lost == doctest::Approx(1.0).epsilon(1e-13));

    // an escapee is dropped entirely
    ParticleSet e;
    e.species_sign = 1;
    e.append(0.0, 0.0, 1.5, 0.0, 0.25);
    deposit_w4_composite(e, f, &lost);
    CHECK(lost == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(f.charge_total() == 0.0);
}

TEST_CASE("periodic spatial dimensions wrap the deposit stencil") {
    CompositeGrid g = flat_grid(8);
    CompositeField f(g, true, true);
    ParticleSet p;
    p.species_sign = 1;
    p.append(-0.99, 0.97, 0.1, -0.2, 1.0);  // near the x and y seams
    double lost = 0;
    deposit_w4_composite(p, f, &lost);
    CHECK(lost == 0.0);
    CHECK(f.charge_total() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("transfer: invalid coarse cell splits onto four fine cells") {
    CompositeGrid g = refined_grid(8);  // coarse h = 0.5; fine box v in [-1,1]
    CompositeField f(g, false, false);
    f.reset(full_windows(g));
    // coarse cell (1,2, 5,6) has v-center (0.75, 1.25)? choose one covered:
    // covered coarse cells in v are indices 2..5 (centers -0.75..0.75)
    Int4 inv{1, 2, 3, 4};
    REQUIRE_FALSE(g.is_valid(CellId{0, inv}));
    double vol_c = g.cell_volume(0);
    f.win(0).at(inv) = 1.0 / vol_c;  // unit charge
    transfer_interface_charge(f);
    CHECK(f.win(0).at(inv) == 0.0);
    // ratio (1,1,2,2): 4 children share it equally and positively
    int count = 0;
    KahanSum got;
    for (int k = 6; k <= 7; ++k)
        for (int l = 8; l <= 9; ++l) {
            double v = f.win(1).at({1, 2, k, l});
            CHECK(v > 0.0);
            got.add(v * g.cell_volume(1));
            ++count;
        }
    CHECK(count == 4);
    CHECK(got.value() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.charge_total() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("transfer: fine halo deposit projects onto one coarse cell") {
    CompositeGrid g = refined_grid(8);
    CompositeField f(g, false, false);
    f.reset(full_windows(g));
    // fine box in v spans indices 4..11 of 16; cell (.,.,3,8) is halo
    Int4 halo{2, 2, 3, 8};
    double vol_f = g.cell_volume(1);
    f.win(1).at(halo) = 1.0 / vol_f;
    transfer_interface_charge(f);
    CHECK(f.win(1).at(halo) == 0.0);
    Int4 parent{2, 2, 1, 4};
    CHECK(f.win(0).at(parent) * g.cell_volume(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.charge_total() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("transfer: no interface activity is the identity") {
    CompositeGrid g = refined_grid(16);  // 4-cell coarse annulus outside the fine box
    CompositeField f(g, true, true);
    ParticleSet p;
    p.species_sign = 1;
    p.append(0.1, 0.1, -1.575, -1.6, 0.5);  // whole stencil in uncovered coarse cells
    double lost = 0;
    deposit_w4_composite(p, f, &lost);
    CHECK(lost == 0.0);
    std::vector<double> before = f.win(0).f;
    transfer_interface_charge(f);
    CHECK(f.win(0).f == before);
}

TEST_CASE("redistribution reproduces the documented 1D example exactly") {
    CompositeGrid g = flat_grid(3);
    CompositeField f(g, false, false);
    f.reset(full_windows(g));
    // a 3-cell strip along vy: values 3, -1, 1
    f.win(0).at({1, 1, 1, 0}) = 3.0;
    f.win(0).at({1, 1, 1, 1}) = -1.0;
    f.win(0).at({1, 1, 1, 2}) = 1.0;
    RedistributeStats st = redistribute_positivity(f, 1, 3);
    CHECK(f.win(0).at({1, 1, 1, 0}) == 2.25);
    CHECK(f.win(0).at({1, 1, 1, 1}) == 0.0);
    CHECK(f.win(0).at({1, 1, 1, 2}) == 0.75);
    CHECK(st.negative_cells == 1);
    CHECK(st.iterations_used == 1);
    CHECK(st.flagged == 0);
    KahanSum s;
    for (double v : f.win(0).f) s.add(v);
    CHECK(s.value() == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("redistribution: non-negative input is untouched, zero capacity flagged") {
    CompositeGrid g = flat_grid(3);
    CompositeField f(g, false, false);
    f.reset(full_windows(g));
    f.win(0).at({0, 0, 0, 0}) = 2.0;
    f.win(0).at({2, 2, 2, 2}) = 0.5;
    std::vector<double> before = f.win(0).f;
    RedistributeStats st = redistribute_positivity(f, 1, 3);
    CHECK(f.win(0).f == before);
    CHECK(st.negative_cells == 0);

    // isolated negative with all-zero neighborhood stays, flagged
    f.win(0).at({0, 0, 0, 0}) = -1.0;
    f.win(0).at({2, 2, 2, 2}) = 0.5;
    st = redistribute_positivity(f, 1, 3);
    CHECK(f.win(0).at({0, 0, 0, 0}) == -1.0);
    CHECK(st.zero_capacity == 3);  // one per sweep
    CHECK(st.flagged == 1);
}

TEST_CASE("regenerate: inversion of the quiet start, thresholds ledgered") {
    CompositeGrid g = flat_grid(4);
    CompositeField f(g, false, false);
    f.reset(full_windows(g));
    f.win(0).at({0, 1, 2, 3}) = 2.0;
    f.win(0).at({3, 3, 3, 3}) = 1e-12;
    double dropped = 0;
    ParticleSet p = regenerate_particles(f, 1e-6, 1, &dropped);
    REQUIRE(p.size() == 1);
    double vol = g.cell_volume(0);
    CHECK(p.q[0] == 2.0 * vol);
    Vec4 c = g.cell_center(CellId{0, {0, 1, 2, 3}});
    CHECK(p.x[0] == c[0]);
    CHECK(p.vy[0] == c[3]);
    CHECK(dropped == doctest::Approx(1e-12 * vol).epsilon(1e-15));

    // zero field -> empty set
    f.reset(full_windows(g));
    ParticleSet none = regenerate_particles(f, 1e-6, 1, &dropped);
    CHECK(none.size() == 0);
    CHECK(dropped == 0.0);

    // threshold above every weight -> empty set, everything ledgered
    f.win(0).at({1, 1, 1, 1}) = 1.0;
    ParticleSet gone = regenerate_particles(f, 10.0 * vol, 1, &dropped);
    CHECK(gone.size() == 0);
    CHECK(dropped == doctest::Approx(vol).epsilon(1e-15));
}

TEST_CASE("remap of a fresh quiet start reproduces the field") {
    CompositeGrid g = refined_grid(8);
    auto f0 = [](const Vec4& z) {
        return std::exp(-(z[2] * z[2] + z[3] * z[3])) * (1.0 + 0.1 * z[0]);
    };
    ParticleSet p = quiet_start_init(g, f0, 0.0, 1);
    double q0 = p.total_charge();
    RemapConfig cfg;
    cfg.drop_threshold = 0.0;
    Remapper rm(g, cfg, true, true);
    RemapReport rep = rm.remap(p);
    // quiet-start particles sit at cell centers: the deposit is a delta and
    // the regenerated set matches the original weights
    CHECK(rep.q_after == doctest::Approx(q0).epsilon(1e-13));
    CHECK(std::abs(rep.residual()) <= 1e-13 * std::abs(q0));
    CHECK(rep.negative_cells == 0);
    CHECK(rep.particles_out == p.size());
}

TEST_CASE("remap conserves charge and contracts under repetition") {
    CompositeGrid g = refined_grid(8);
    auto f0 = [](const Vec4& z) {
        return std::exp(-(z[2] * z[2] + z[3] * z[3]) / 0.3) *
               (1.0 + 0.3 * std::sin(1.5 * z[0]) * std::cos(0.7 * z[1]));
    };
    ParticleSet p = quiet_start_init(g, f0, 0.0, 1);
    // perturb positions so the remap actually smooths
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-0.2, 0.2);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.x[i] += uni(rng);
        if (p.x[i] < -2.0) p.x[i] += 4.0;
        if (p.x[i] >= 2.0) p.x[i] -= 4.0;
        p.vx[i] += uni(rng) * 0.5;
        if (p.vx[i] < -2.0 || p.vx[i] > 2.0) p.vx[i] = 0.0;
    }
    double q0 = p.total_charge();
    RemapConfig cfg;
    cfg.drop_threshold = 1e-14;
    Remapper rm(g, cfg, true, true);

    // weights keyed by exact cell-center coordinates measure the L1 change
    auto snapshot = [](const ParticleSet& s) {
        std::map<std::array<double, 4>, double> m;
        for (std::size_t i = 0; i < s.size(); ++i)
            m[{s.x[i], s.y[i], s.vx[i], s.vy[i]}] = s.q[i];
        return m;
    };
    auto l1_diff = [](const std::map<std::array<double, 4>, double>& a,
                      const std::map<std::array<double, 4>, double>& b) {
        double d = 0;
        for (const auto& [k, v] : a) {
            auto it = b.find(k);
            d += std::abs(v - (it == b.end() ? 0.0 : it->second));
        }
        for (const auto& [k, v] : b)
            if (!a.count(k)) d += std::abs(v);
        return d;
    };

    auto s0 = snapshot(p);  // distorted input
    RemapReport r1 = rm.remap(p);
    CHECK(std::abs(r1.residual()) <= 1e-12 * std::abs(r1.q_before));
    CHECK(r1.q_after + r1.dropped + r1.lost == doctest::Approx(q0).epsilon(1e-12));
    auto s1 = snapshot(p);
    RemapReport r2 = rm.remap(p);
    CHECK(std::abs(r2.residual()) <= 1e-12 * std::abs(r2.q_before));
    auto s2 = snapshot(p);
    // repeated smoothing contracts: the second remap changes strictly less
    CHECK(l1_diff(s2, s1) < l1_diff(s1, s0));
}

TEST_CASE("single positive particle regenerates non-negative after redistribution") {
    CompositeGrid g = flat_grid(10);
    RemapConfig cfg;
    cfg.drop_threshold = 0.0;
    cfg.positivity_iters = 3;
    Remapper rm(g, cfg, false, false);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-0.4, 0.4);
    for (int trial = 0; trial < 10; ++trial) {
        ParticleSet p;
        p.species_sign = 1;
        p.append(uni(rng), uni(rng), uni(rng), uni(rng), 1.0);
        RemapReport rep = rm.remap(p);
        CHECK(rep.flagged == 0);
        CHECK(rep.min_f >= -1e-13 * rep.max_f);
        for (double w : p.q) CHECK(w >= -1e-13 * rep.max_f);
        CHECK(std::abs(rep.residual()) <= 1e-12);
    }
}
