#pragma once

#include "vp2d/geom.hpp"

#include <cstddef>
#include <vector>

namespace vp2d {

// Node-centered 2D grid geometry. Periodic grids have nx*ny unique nodes and
// span nx*spacing; bounded grids include both end nodes and span
// (nx-1)*spacing.
struct FieldGeom2D {
    int nx = 0, ny = 0;
    Vec2 spacing{1.0, 1.0};
    Vec2 origin{0.0, 0.0};
    bool periodic = true;

    std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
    std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
    double node_x(int i) const { return origin[0] + i * spacing[0]; }
    double node_y(int j) const { return origin[1] + j * spacing[1]; }
    double cell_area() const { return spacing[0] * spacing[1]; }

    bool same_shape(const FieldGeom2D& o) const {
        return nx == o.nx && ny == o.ny && periodic == o.periodic;
    }
};

struct ScalarGrid2D {
    FieldGeom2D g;
    std::vector<double> a;

    ScalarGrid2D() = default;
    explicit ScalarGrid2D(const FieldGeom2D& geom) : g(geom), a(geom.size(), 0.0) {}
    double& at(int i, int j) { return a[g.idx(i, j)]; }
    double at(int i, int j) const { return a[g.idx(i, j)]; }
    void fill(double v) { a.assign(g.size(), v); }
};

struct VecGrid2D {
    FieldGeom2D g;
    std::vector<double> x, y;

    VecGrid2D() = default;
    explicit VecGrid2D(const FieldGeom2D& geom)
        : g(geom), x(geom.size(), 0.0), y(geom.size(), 0.0) {}
};

}  // namespace vp2d
