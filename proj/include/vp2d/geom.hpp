#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace vp2d {

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;
using Int4 = std::array<int, 4>;

inline constexpr int kDim = 4;

inline int floor_div(int a, int b) {
    int q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

// Inclusive box of cell indices in a 4D index lattice.
struct Box4 {
    Int4 lo{};
    Int4 hi{};

    bool contains(const Int4& p) const {
        for (int d = 0; d < kDim; ++d)
            if (p[d] < lo[d] || p[d] > hi[d]) return false;
        return true;
    }

    bool empty() const {
        for (int d = 0; d < kDim; ++d)
            if (lo[d] > hi[d]) return true;
        return false;
    }

    std::int64_t count() const {
        if (empty()) return 0;
        std::int64_t n = 1;
        for (int d = 0; d < kDim; ++d) n *= std::int64_t(hi[d] - lo[d] + 1);
        return n;
    }

    Int4 extent() const {
        Int4 e;
        for (int d = 0; d < kDim; ++d) e[d] = hi[d] - lo[d] + 1;
        return e;
    }

    bool overlaps(const Box4& o) const {
        for (int d = 0; d < kDim; ++d)
            if (hi[d] < o.lo[d] || o.hi[d] < lo[d]) return false;
        return true;
    }

    static Box4 intersect(const Box4& a, const Box4& b) {
        Box4 r;
        for (int d = 0; d < kDim; ++d) {
            r.lo[d] = a.lo[d] > b.lo[d] ? a.lo[d] : b.lo[d];
            r.hi[d] = a.hi[d] < b.hi[d] ? a.hi[d] : b.hi[d];
        }
        return r;
    }

    static Box4 hull(const Box4& a, const Box4& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        Box4 r;
        for (int d = 0; d < kDim; ++d) {
            r.lo[d] = a.lo[d] < b.lo[d] ? a.lo[d] : b.lo[d];
            r.hi[d] = a.hi[d] > b.hi[d] ? a.hi[d] : b.hi[d];
        }
        return r;
    }

    Box4 grown(int g) const {
        Box4 r = *this;
        for (int d = 0; d < kDim; ++d) {
            r.lo[d] -= g;
            r.hi[d] += g;
        }
        return r;
    }

    // Covering coarsening: every cell of *this has its parent inside the result.
    Box4 coarsened(const Int4& r) const {
        Box4 c;
        for (int d = 0; d < kDim; ++d) {
            c.lo[d] = floor_div(lo[d], r[d]);
            c.hi[d] = floor_div(hi[d], r[d]);
        }
        return c;
    }

    Box4 refined(const Int4& r) const {
        Box4 f;
        for (int d = 0; d < kDim; ++d) {
            f.lo[d] = lo[d] * r[d];
            f.hi[d] = (hi[d] + 1) * r[d] - 1;
        }
        return f;
    }

    bool operator==(const Box4& o) const { return lo == o.lo && hi == o.hi; }
};

// Neumaier-compensated accumulator for conservation ledgers and diagnostics.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

}  // namespace vp2d
