#pragma once

#include "vp2d/errors.hpp"
#include "vp2d/geom.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace vp2d {

// Physical refinement region plus the per-dimension refinement ratio applied
// to the level it creates. Regions are snapped outward to parent cell faces.
struct RefinementSpec {
    Vec4 lo{};
    Vec4 hi{};
    Int4 ratio{1, 1, 1, 1};
};

struct Level {
    int index = 0;
    Vec4 h{};               // mesh spacing; h_{l+1} = h_l / r_l holds bitwise
    Int4 ratio{1, 1, 1, 1};  // to level index+1 (all ones at the finest level)
    Int4 ncells{};           // global index-space extent at this spacing
    std::vector<Box4> boxes;
    std::vector<Box4> covered;  // level-(index+1) boxes coarsened to this level

    bool in_boxes(const Int4& idx) const {
        for (const Box4& b : boxes)
            if (b.contains(idx)) return true;
        return false;
    }
    bool is_covered(const Int4& idx) const {
        for (const Box4& b : covered)
            if (b.contains(idx)) return true;
        return false;
    }
};

struct CellId {
    int level = 0;
    Int4 idx{};
};

// Hierarchy of cell-centered 4D grids. Level 0 covers the whole phase-space
// domain; a cell is valid iff no finer level overlays it, and the valid cells
// of all levels tile the domain exactly once.
class CompositeGrid {
  public:
    static CompositeGrid build(const Vec4& domain_lo, const Vec4& domain_hi,
                               const Int4& base_cells,
                               const std::vector<RefinementSpec>& refinements);

    int num_levels() const { return int(levels_.size()); }
    const Level& level(int l) const { return levels_[std::size_t(l)]; }
    const Vec4& domain_lo() const { return lo_; }
    const Vec4& domain_hi() const { return hi_; }

    double cell_volume(int l) const {
        const Vec4& h = levels_[std::size_t(l)].h;
        return h[0] * h[1] * h[2] * h[3];
    }

    // True iff the cell is not overlain by a finer level. Throws when the
    // index is outside the level's boxes.
    bool is_valid(const CellId& c) const;

    // The unique valid cell containing the point. Cells own their upper faces
    // (ties at a face go to the lower-index cell); the domain lower boundary
    // is clamped into cell 0.
    CellId locate_valid_cell(const Vec4& p) const;

    Vec4 cell_center(const CellId& c) const {
        const Level& L = levels_[std::size_t(c.level)];
        Vec4 x;
        for (int d = 0; d < kDim; ++d) x[d] = lo_[d] + (double(c.idx[d]) + 0.5) * L.h[d];
        return x;
    }

    std::int64_t valid_cell_count() const;
    double total_valid_volume() const;  // compensated sum, for tiling checks

    // Visit valid cells of one level inside an index window, lexicographic in
    // (x, y, vx, vy) with vy fastest.
    template <class F>
    void for_valid_cells(int l, const Box4& window, F&& f) const {
        const Level& L = levels_[std::size_t(l)];
        for (const Box4& b : L.boxes) {
            Box4 w = Box4::intersect(b, window);
            if (w.empty()) continue;
            Int4 i;
            for (i[0] = w.lo[0]; i[0] <= w.hi[0]; ++i[0])
                for (i[1] = w.lo[1]; i[1] <= w.hi[1]; ++i[1])
                    for (i[2] = w.lo[2]; i[2] <= w.hi[2]; ++i[2])
                        for (i[3] = w.lo[3]; i[3] <= w.hi[3]; ++i[3]) {
                            if (L.is_covered(i)) continue;
                            f(CellId{l, i});
                        }
        }
    }

    template <class F>
    void for_valid_cells(int l, F&& f) const {
        Box4 all;
        all.lo = {0, 0, 0, 0};
        for (int d = 0; d < kDim; ++d) all.hi[d] = levels_[std::size_t(l)].ncells[d] - 1;
        for_valid_cells(l, all, f);
    }

  private:
    Vec4 lo_{}, hi_{};
    std::vector<Level> levels_;
};

// Cell index along one axis under the upper-face-ownership convention.
inline int upper_face_index(double z, int ncells) {
    int i = int(std::ceil(z)) - 1;
    if (i < 0) i = 0;
    if (i >= ncells) i = ncells - 1;
    return i;
}

}  // namespace vp2d
