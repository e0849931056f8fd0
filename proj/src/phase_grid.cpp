#include "vp2d/phase_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vp2d {
namespace {

// Snap a physical coordinate to a cell-face index of a level, preferring the
// exact face when within round-off and otherwise rounding outward.
int snap_face(double coord, double lo, double h, bool outward_low) {
    double f = (coord - lo) / h;
    double r = std::round(f);
    if (std::abs(f - r) <= 1e-9 * std::max(1.0, std::abs(f))) return int(r);
    return outward_low ? int(std::floor(f)) : int(std::ceil(f));
}

// Subtract a box from each piece, keeping the remainders.
std::vector<Box4> subtract_box(const std::vector<Box4>& pieces, const Box4& cut) {
    std::vector<Box4> out;
    for (const Box4& p : pieces) {
        if (!p.overlaps(cut)) {
            out.push_back(p);
            continue;
        }
        Box4 rest = p;
        for (int d = 0; d < kDim; ++d) {
            if (rest.lo[d] < cut.lo[d]) {
                Box4 slab = rest;
                slab.hi[d] = cut.lo[d] - 1;
                out.push_back(slab);
                rest.lo[d] = cut.lo[d];
            }
            if (rest.hi[d] > cut.hi[d]) {
                Box4 slab = rest;
                slab.lo[d] = cut.hi[d] + 1;
                out.push_back(slab);
                rest.hi[d] = cut.hi[d];
            }
        }
        // rest is now inside cut and is dropped
    }
    return out;
}

bool contained_in_union(const Box4& b, const std::vector<Box4>& boxes) {
    std::vector<Box4> pieces{b};
    for (const Box4& u : boxes) {
        pieces = subtract_box(pieces, u);
        if (pieces.empty()) return true;
    }
    return pieces.empty();
}

}  // namespace

CompositeGrid CompositeGrid::build(const Vec4& domain_lo, const Vec4& domain_hi,
                                   const Int4& base_cells,
                                   const std::vector<RefinementSpec>& refinements) {
    CompositeGrid g;
    g.lo_ = domain_lo;
    g.hi_ = domain_hi;

    Level base;
    base.index = 0;
    for (int d = 0; d < kDim; ++d) {
        if (base_cells[d] < 1) throw ConfigError("phase grid: base cells must be >= 1");
        if (!(domain_hi[d] > domain_lo[d])) throw ConfigError("phase grid: empty domain");
        base.ncells[d] = base_cells[d];
        base.h[d] = (domain_hi[d] - domain_lo[d]) / double(base_cells[d]);
    }
    base.boxes.push_back(Box4{});
    base.boxes[0].lo = {0, 0, 0, 0};
    for (int d = 0; d < kDim; ++d) base.boxes[0].hi[d] = base_cells[d] - 1;
    g.levels_.push_back(base);

    for (const RefinementSpec& r : refinements) {
        Level& parent = g.levels_.back();
        Box4 cells;  // parent-level cell range of the snapped region
        for (int d = 0; d < kDim; ++d) {
            if (r.ratio[d] < 1) throw ConfigError("phase grid: refinement ratio must be >= 1");
            int flo = snap_face(r.lo[d], domain_lo[d], parent.h[d], true);
            int fhi = snap_face(r.hi[d], domain_lo[d], parent.h[d], false);
            if (fhi <= flo) throw ConfigError("phase grid: refinement region is empty");
            cells.lo[d] = flo;
            cells.hi[d] = fhi - 1;
        }
        if (!contained_in_union(cells, parent.boxes))
            throw ConfigError("phase grid: refinement region does not nest inside level " +
                              std::to_string(parent.index));
        parent.ratio = r.ratio;
        parent.covered.push_back(cells);

        Level fine;
        fine.index = parent.index + 1;
        for (int d = 0; d < kDim; ++d) {
            fine.ncells[d] = parent.ncells[d] * r.ratio[d];
            fine.h[d] = parent.h[d] / double(r.ratio[d]);
        }
        fine.boxes.push_back(cells.refined(r.ratio));
        g.levels_.push_back(fine);
    }
    return g;
}

bool CompositeGrid::is_valid(const CellId& c) const {
    if (c.level < 0 || c.level >= num_levels()) throw NumericsError("is_valid: no such level");
    const Level& L = levels_[std::size_t(c.level)];
    if (!L.in_boxes(c.idx))
        throw NumericsError("is_valid: cell index outside level " + std::to_string(c.level));
    return !L.is_covered(c.idx);
}

CellId CompositeGrid::locate_valid_cell(const Vec4& p) const {
    for (int l = num_levels() - 1; l >= 0; --l) {
        const Level& L = levels_[std::size_t(l)];
        Int4 idx;
        for (int d = 0; d < kDim; ++d)
            idx[d] = upper_face_index((p[d] - lo_[d]) / L.h[d], L.ncells[d]);
        if (L.in_boxes(idx)) return CellId{l, idx};
    }
    throw NumericsError("locate_valid_cell: point outside the phase-space domain");
}

std::int64_t CompositeGrid::valid_cell_count() const {
    std::int64_t n = 0;
    for (int l = 0; l < num_levels(); ++l) for_valid_cells(l, [&](const CellId&) { ++n; });
    return n;
}

double CompositeGrid::total_valid_volume() const {
    KahanSum s;
    for (int l = 0; l < num_levels(); ++l) {
        double v = cell_volume(l);
        for_valid_cells(l, [&](const CellId&) { s.add(v); });
    }
    return s.value();
}

}  // namespace vp2d
