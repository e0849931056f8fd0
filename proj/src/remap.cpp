#include "vp2d/remap.hpp"

#include "vp2d/errors.hpp"
#include "vp2d/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace vp2d {

void CompositeField::reset(const std::vector<Box4>& boxes) {
    for (std::size_t l = 0; l < wins_.size(); ++l) {
        Win& w = wins_[l];
        w.box = boxes[l];
        if (w.box.empty()) {
            w.f.clear();
            continue;
        }
        Int4 e = w.box.extent();
        w.stride[3] = 1;
        w.stride[2] = e[3];
        w.stride[1] = std::ptrdiff_t(e[2]) * e[3];
        w.stride[0] = std::ptrdiff_t(e[1]) * e[2] * e[3];
        w.f.assign(std::size_t(w.box.count()), 0.0);
    }
}

double CompositeField::charge_total() const {
    KahanSum s;
    for (int l = 0; l < num_levels(); ++l) {
        const double vol = grid_->cell_volume(l);
        for (double v : wins_[std::size_t(l)].f)
            if (v != 0.0) s.add(v * vol);
    }
    return s.value();
}

namespace {

struct StencilDim {
    int jstart;
    double w[4];
};

// 4-point W4 stencil along one axis; z is the position in cell units.
inline void stencil_1d(double z, StencilDim& s) {
    s.jstart = int(std::floor(z + 1.5)) - 3;
    for (int m = 0; m < 4; ++m)
        s.w[m] = kern::w4_eval_s(std::abs(double(s.jstart + m) + 0.5 - z));
}

inline int fold_periodic(int j, int n) {
    if (j < 0) return j + n;
    if (j >= n) return j - n;
    return j;
}

}  // namespace

void deposit_w4_composite(const ParticleSet& p, CompositeField& field, double* lost) {
    const CompositeGrid& grid = field.grid();
    const int nlev = grid.num_levels();
    const std::size_t nl = std::size_t(nlev);
    const std::size_t n = p.size();
    const Vec4& dlo = grid.domain_lo();
    const Vec4& dhi = grid.domain_hi();

    // Pass A: level of each particle and per-level position bounds.
    std::vector<std::uint8_t> plevel(n);
    std::vector<Vec4> pmin(nl), pmax(nl);
    std::vector<bool> any(nl, false);
    KahanSum lostsum;
    for (std::size_t i = 0; i < n; ++i) {
        Vec4 pos{p.x[i], p.y[i], p.vx[i], p.vy[i]};
        bool inside = true;
        for (int d = 0; d < kDim; ++d)
            if (!(pos[d] >= dlo[d] && pos[d] <= dhi[d])) inside = false;
        if (!inside) {  // escapee: drop into the lost-mass ledger
            plevel[i] = 255;
            lostsum.add(p.q[i]);
            continue;
        }
        CellId c = grid.locate_valid_cell(pos);
        plevel[i] = std::uint8_t(c.level);
        std::size_t l = std::size_t(c.level);
        if (!any[l]) {
            pmin[l] = pmax[l] = pos;
            any[l] = true;
        } else {
            for (int d = 0; d < kDim; ++d) {
                if (pos[d] < pmin[l][d]) pmin[l][d] = pos[d];
                if (pos[d] > pmax[l][d]) pmax[l][d] = pos[d];
            }
        }
    }

    // Window boxes: stencil support, plus coarse images of fine windows (halo
    // projection targets) and fine images of covered coarse regions (invalid
    // release targets), clipped to the index extent; periodic dimensions keep
    // the full extent so stencils can wrap.
    std::vector<Box4> wins(nl);
    for (int l = 0; l < nlev; ++l) {
        const Level& L = grid.level(l);
        Box4 b;
        if (any[std::size_t(l)]) {
            for (int d = 0; d < kDim; ++d) {
                b.lo[d] = int(std::floor((pmin[std::size_t(l)][d] - dlo[d]) / L.h[d])) - 3;
                b.hi[d] = int(std::floor((pmax[std::size_t(l)][d] - dlo[d]) / L.h[d])) + 3;
            }
        } else {
            b.lo = {0, 0, 0, 0};
            b.hi = {-1, -1, -1, -1};
        }
        wins[std::size_t(l)] = b;
    }
    for (int l = nlev - 1; l >= 1; --l) {
        if (wins[std::size_t(l)].empty()) continue;
        const Int4& r = grid.level(l - 1).ratio;
        wins[std::size_t(l - 1)] =
            Box4::hull(wins[std::size_t(l - 1)], wins[std::size_t(l)].coarsened(r));
    }
    for (int l = 0; l + 1 < nlev; ++l) {
        if (wins[std::size_t(l)].empty()) continue;
        const Level& L = grid.level(l);
        for (const Box4& cb : L.covered) {
            Box4 piece = Box4::intersect(wins[std::size_t(l)], cb);
            if (!piece.empty())
                wins[std::size_t(l + 1)] =
                    Box4::hull(wins[std::size_t(l + 1)], piece.refined(L.ratio));
        }
    }
    for (int l = 0; l < nlev; ++l) {
        if (wins[std::size_t(l)].empty()) continue;
        const Level& L = grid.level(l);
        for (int d = 0; d < kDim; ++d) {
            if (field.periodic(d)) {
                wins[std::size_t(l)].lo[d] = 0;
                wins[std::size_t(l)].hi[d] = L.ncells[d] - 1;
            } else {
                wins[std::size_t(l)].lo[d] = std::max(wins[std::size_t(l)].lo[d], 0);
                wins[std::size_t(l)].hi[d] = std::min(wins[std::size_t(l)].hi[d], L.ncells[d] - 1);
            }
        }
    }
    field.reset(wins);

    // Pass B: deposit. Fully in-window stencils use the SIMD tensor kernel;
    // stencils clipped by the velocity-domain boundary take the slow path and
    // ledger the truncated mass.
    const kern::Ops& K = kern::ops();
    for (std::size_t i = 0; i < n; ++i) {
        if (plevel[i] == 255) continue;
        const int l = plevel[i];
        const Level& L = grid.level(l);
        CompositeField::Win& w = field.win(l);
        const double vol = grid.cell_volume(l);
        const double coeff = p.q[i] / vol;
        const Vec4 pos{p.x[i], p.y[i], p.vx[i], p.vy[i]};

        StencilDim sd[4];
        bool fast = true;
        for (int d = 0; d < kDim; ++d) {
            stencil_1d((pos[d] - dlo[d]) / L.h[d], sd[d]);
            if (!field.periodic(d) &&
                (sd[d].jstart < w.box.lo[d] || sd[d].jstart + 3 > w.box.hi[d]))
                fast = false;
        }

        if (fast) {
            std::ptrdiff_t offx[4], offy[4], offk[4];
            for (int m = 0; m < 4; ++m) {
                int jx = sd[0].jstart + m;
                int jy = sd[1].jstart + m;
                if (field.periodic(0)) jx = fold_periodic(jx, L.ncells[0]);
                if (field.periodic(1)) jy = fold_periodic(jy, L.ncells[1]);
                offx[m] = std::ptrdiff_t(jx - w.box.lo[0]) * w.stride[0];
                offy[m] = std::ptrdiff_t(jy - w.box.lo[1]) * w.stride[1];
                offk[m] = std::ptrdiff_t(sd[2].jstart + m - w.box.lo[2]) * w.stride[2];
            }
            std::ptrdiff_t offl0 = sd[3].jstart - w.box.lo[3];
            K.w4_cell_add(w.f.data(), offx, offy, offk, offl0, sd[0].w, sd[1].w, sd[2].w, sd[3].w,
                          coeff);
        } else {
            for (int a = 0; a < 4; ++a) {
                int jx = sd[0].jstart + a;
                if (field.periodic(0)) jx = fold_periodic(jx, L.ncells[0]);
                bool okx = jx >= 0 && jx < L.ncells[0];
                double ca = coeff * sd[0].w[a];
                for (int b = 0; b < 4; ++b) {
                    int jy = sd[1].jstart + b;
                    if (field.periodic(1)) jy = fold_periodic(jy, L.ncells[1]);
                    bool oky = okx && jy >= 0 && jy < L.ncells[1];
                    double cab = ca * sd[1].w[b];
                    for (int c = 0; c < 4; ++c) {
                        int jk = sd[2].jstart + c;
                        bool okk = oky && jk >= 0 && jk < L.ncells[2];
                        double cabc = cab * sd[2].w[c];
                        for (int e = 0; e < 4; ++e) {
                            int jl = sd[3].jstart + e;
                            double v = cabc * sd[3].w[e];
                            if (okk && jl >= 0 && jl < L.ncells[3]) {
                                Int4 idx{jx, jy, jk, jl};
                                w.at(idx) += v;
                            } else {
                                lostsum.add(v * vol);
                            }
                        }
                    }
                }
            }
        }
    }
    *lost = lostsum.value();
}

void transfer_interface_charge(CompositeField& field) {
    const CompositeGrid& g = field.grid();

    // Fine halo deposits project to the parent cell (volume-weighted).
    for (int l = g.num_levels() - 1; l >= 1; --l) {
        CompositeField::Win& wf = field.win(l);
        if (wf.f.empty()) continue;
        CompositeField::Win& wc = field.win(l - 1);
        const Level& Lf = g.level(l);
        const Int4& r = g.level(l - 1).ratio;
        const double volratio = g.cell_volume(l) / g.cell_volume(l - 1);
        Int4 i;
        const Box4& b = wf.box;
        for (i[0] = b.lo[0]; i[0] <= b.hi[0]; ++i[0])
            for (i[1] = b.lo[1]; i[1] <= b.hi[1]; ++i[1])
                for (i[2] = b.lo[2]; i[2] <= b.hi[2]; ++i[2])
                    for (i[3] = b.lo[3]; i[3] <= b.hi[3]; ++i[3]) {
                        double v = wf.at(i);
                        if (v == 0.0 || Lf.in_boxes(i)) continue;
                        Int4 par;
                        for (int d = 0; d < kDim; ++d) par[d] = floor_div(i[d], r[d]);
                        wc.at(par) += v * volratio;
                        wf.at(i) = 0.0;
                    }
    }

    // Invalid coarse deposits split onto the covering fine cells with
    // cloud-in-cell weights (dyadic for ratio 2, so the transfer is exact).
    for (int l = 0; l + 1 < g.num_levels(); ++l) {
        CompositeField::Win& wc = field.win(l);
        if (wc.f.empty()) continue;
        CompositeField::Win& wf = field.win(l + 1);
        const Level& Lc = g.level(l);
        const Int4& r = Lc.ratio;
        const double volratio = g.cell_volume(l) / g.cell_volume(l + 1);
        for (const Box4& cb : Lc.covered) {
            Box4 bx = Box4::intersect(cb, wc.box);
            if (bx.empty()) continue;
            Int4 i;
            for (i[0] = bx.lo[0]; i[0] <= bx.hi[0]; ++i[0])
                for (i[1] = bx.lo[1]; i[1] <= bx.hi[1]; ++i[1])
                    for (i[2] = bx.lo[2]; i[2] <= bx.hi[2]; ++i[2])
                        for (i[3] = bx.lo[3]; i[3] <= bx.hi[3]; ++i[3]) {
                            double v = wc.at(i);
                            if (v == 0.0) continue;
                            int mlo[4];
                            double whi[4];
                            for (int d = 0; d < kDim; ++d) {
                                double zf = (double(i[d]) + 0.5) * double(r[d]) - 0.5;
                                mlo[d] = int(std::floor(zf));
                                whi[d] = zf - double(mlo[d]);
                            }
                            double base = v * volratio;
                            for (int a = 0; a < 2; ++a) {
                                double wa = a ? whi[0] : 1.0 - whi[0];
                                if (wa == 0.0) continue;
                                for (int bq = 0; bq < 2; ++bq) {
                                    double wb = bq ? whi[1] : 1.0 - whi[1];
                                    if (wb == 0.0) continue;
                                    for (int c = 0; c < 2; ++c) {
                                        double wcc = c ? whi[2] : 1.0 - whi[2];
                                        if (wcc == 0.0) continue;
                                        for (int e = 0; e < 2; ++e) {
                                            double we = e ? whi[3] : 1.0 - whi[3];
                                            if (we == 0.0) continue;
                                            Int4 ch{mlo[0] + a, mlo[1] + bq, mlo[2] + c,
                                                    mlo[3] + e};
                                            wf.at(ch) += base * ((wa * wb) * (wcc * we));
                                        }
                                    }
                                }
                            }
                            wc.at(i) = 0.0;
                        }
        }
    }
}

RedistributeStats redistribute_positivity(CompositeField& field, int radius, int iterations) {
    RedistributeStats st;
    const CompositeGrid& g = field.grid();
    std::vector<double> inc;
    std::vector<std::ptrdiff_t> negs;

    for (int l = 0; l < g.num_levels(); ++l) {
        CompositeField::Win& w = field.win(l);
        if (w.f.empty()) continue;
        const Level& L = g.level(l);
        const Box4& b = w.box;

        // Neighborhoods are precomputed flat-offset tables; only cells near a
        // window face take the folding path.
        const std::size_t nrad = std::size_t(radius);
        std::vector<std::vector<std::ptrdiff_t>> deltas(nrad);
        std::vector<std::vector<Int4>> offs(nrad);
        for (int r = 1; r <= radius; ++r) {
            Int4 o;
            for (o[0] = -r; o[0] <= r; ++o[0])
                for (o[1] = -r; o[1] <= r; ++o[1])
                    for (o[2] = -r; o[2] <= r; ++o[2])
                        for (o[3] = -r; o[3] <= r; ++o[3]) {
                            if (o[0] == 0 && o[1] == 0 && o[2] == 0 && o[3] == 0) continue;
                            std::ptrdiff_t d = 0;
                            for (int dd = 0; dd < kDim; ++dd) d += o[dd] * w.stride[dd];
                            deltas[std::size_t(r - 1)].push_back(d);
                            offs[std::size_t(r - 1)].push_back(o);
                        }
        }

        // folding neighbor walk for cells near a window face
        auto each_boundary_neighbor = [&](const Int4& idx, int r, auto&& fn) {
            for (const Int4& o : offs[std::size_t(r - 1)]) {
                Int4 nb;
                bool ok = true;
                for (int d = 0; d < kDim; ++d) {
                    int j = idx[d] + o[d];
                    if (field.periodic(d)) j = fold_periodic(j, L.ncells[d]);
                    if (j < b.lo[d] || j > b.hi[d]) {
                        ok = false;
                        break;
                    }
                    nb[d] = j;
                }
                if (ok) fn(std::size_t(w.offset(nb)));
            }
        };

        for (int sweep = 1; sweep <= iterations; ++sweep) {
            negs.clear();
            for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(w.f.size()); ++k)
                if (w.f[std::size_t(k)] < 0.0) negs.push_back(k);
            if (sweep == 1) st.negative_cells += std::int64_t(negs.size());
            if (negs.empty()) break;
            if (sweep > st.iterations_used) st.iterations_used = sweep;
            inc.assign(w.f.size(), 0.0);
            for (std::ptrdiff_t k : negs) {
                Int4 idx;
                std::ptrdiff_t rem = k;
                for (int d = 0; d < kDim; ++d) {
                    idx[d] = int(rem / w.stride[d]) + b.lo[d];
                    rem %= w.stride[d];
                }
                double deficit = w.f[std::size_t(k)];
                bool placed = false;
                const int r = radius;
                {
                    bool interior = true;
                    for (int d = 0; d < kDim; ++d)
                        if (idx[d] - r < b.lo[d] || idx[d] + r > b.hi[d]) interior = false;
                    double cap = 0.0;
                    if (interior) {
                        const double* f0 = w.f.data() + k;
                        for (std::ptrdiff_t d : deltas[std::size_t(r - 1)]) {
                            double c = f0[d];
                            if (c > 0.0) cap += c;
                        }
                    } else {
                        each_boundary_neighbor(idx, r, [&](std::size_t no) {
                            double c = w.f[no];
                            if (c > 0.0) cap += c;
                        });
                    }
                    if (cap > 0.0) {
                        double share = deficit / cap;
                        if (interior) {
                            const double* f0 = w.f.data() + k;
                            double* i0 = inc.data() + k;
                            for (std::ptrdiff_t d : deltas[std::size_t(r - 1)]) {
                                double c = f0[d];
                                if (c > 0.0) i0[d] += c * share;
                            }
                        } else {
                            each_boundary_neighbor(idx, r, [&](std::size_t no) {
                                double c = w.f[no];
                                if (c > 0.0) inc[no] += c * share;
                            });
                        }
                        placed = true;
                    }
                }
                if (placed)
                    w.f[std::size_t(k)] = 0.0;
                else
                    ++st.zero_capacity;
            }
            for (std::size_t k = 0; k < w.f.size(); ++k) w.f[k] += inc[k];
        }
    }

    double minf = 0.0, maxf = 0.0;
    for (int l = 0; l < g.num_levels(); ++l)
        for (double v : field.win(l).f) {
            if (v < minf) minf = v;
            if (v > maxf) maxf = v;
        }
    st.min_f = minf;
    st.max_f = maxf;
    const double tol = -1e-13 * maxf;
    for (int l = 0; l < g.num_levels(); ++l)
        for (double v : field.win(l).f)
            if (v < tol) ++st.flagged;
    return st;
}

ParticleSet regenerate_particles(const CompositeField& field, double threshold, int species_sign,
                                 double* dropped) {
    const CompositeGrid& g = field.grid();
    ParticleSet out;
    out.species_sign = species_sign;
    KahanSum drop;
    for (int l = 0; l < g.num_levels(); ++l) {
        const CompositeField::Win& w = field.win(l);
        if (w.f.empty()) continue;
        const Level& L = g.level(l);
        const double vol = g.cell_volume(l);
        const Vec4& dlo = g.domain_lo();
        Int4 i;
        const Box4& b = w.box;
        std::size_t off = 0;
        for (i[0] = b.lo[0]; i[0] <= b.hi[0]; ++i[0])
            for (i[1] = b.lo[1]; i[1] <= b.hi[1]; ++i[1])
                for (i[2] = b.lo[2]; i[2] <= b.hi[2]; ++i[2])
                    for (i[3] = b.lo[3]; i[3] <= b.hi[3]; ++i[3], ++off) {
                        double f = w.f[off];
                        if (f == 0.0) continue;
                        if (!L.in_boxes(i) || L.is_covered(i))
                            throw NumericsError(
                                "remap: charge stranded outside valid cells after transfer");
                        double q = f * vol;
                        if (std::abs(q) < threshold) {
                            drop.add(q);
                            continue;
                        }
                        out.append(dlo[0] + (double(i[0]) + 0.5) * L.h[0],
                                   dlo[1] + (double(i[1]) + 0.5) * L.h[1],
                                   dlo[2] + (double(i[2]) + 0.5) * L.h[2],
                                   dlo[3] + (double(i[3]) + 0.5) * L.h[3], q);
                    }
    }
    *dropped = drop.value();
    return out;
}

RemapReport Remapper::remap(ParticleSet& p) {
    RemapReport r;
    r.q_before = p.total_charge();
    double lost = 0.0;
    deposit_w4_composite(p, field_, &lost);
    r.lost = lost;
    transfer_interface_charge(field_);
    RedistributeStats st =
        redistribute_positivity(field_, cfg_.redistribution_radius, cfg_.positivity_iters);
    r.negative_cells = st.negative_cells;
    r.iterations_used = st.iterations_used;
    r.zero_capacity = st.zero_capacity;
    r.flagged = st.flagged;
    r.min_f = st.min_f;
    r.max_f = st.max_f;
    double dropped = 0.0;
    ParticleSet np = regenerate_particles(field_, cfg_.drop_threshold, p.species_sign, &dropped);
    r.dropped = dropped;
    r.q_after = np.total_charge();
    r.particles_out = np.size();
    p = std::move(np);
    return r;
}

}  // namespace vp2d
