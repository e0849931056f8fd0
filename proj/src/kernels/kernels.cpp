#include "vp2d/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace vp2d::kern {

#if !defined(VP2D_HAVE_AVX2_TU)
const Ops* avx2_ops() { return nullptr; }
#endif
#if !defined(VP2D_HAVE_NEON_TU)
const Ops* neon_ops() { return nullptr; }
#endif

namespace {

const Ops& select() {
    if (const char* e = std::getenv("VP2D_ISA")) {
        if (std::strcmp(e, "scalar") == 0) return scalar_ops();
        if (std::strcmp(e, "avx2") == 0 && avx2_ops()) return *avx2_ops();
        if (std::strcmp(e, "neon") == 0 && neon_ops()) return *neon_ops();
    }
    if (const Ops* t = avx2_ops()) return *t;
    if (const Ops* t = neon_ops()) return *t;
    return scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& t = select();
    return t;
}

Isa active_isa() {
    const Ops& t = ops();
    if (&t == avx2_ops()) return Isa::avx2;
    if (&t == neon_ops()) return Isa::neon;
    return Isa::scalar;
}

}  // namespace vp2d::kern
