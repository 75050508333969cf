// Runtime kernel selection.  The default is the best implementation the CPU
// supports; ASCHWARZ_SIMD=scalar|avx2|auto overrides it (avx2 on an
// unsupported CPU falls back to scalar).

#include "aschwarz/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace aschwarz::kern {
namespace {

const Ops& select() {
    const Ops* avx2 = avx2_ops();
    const char* env = std::getenv("ASCHWARZ_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
        if (std::strcmp(env, "avx2") == 0 && avx2 != nullptr) return *avx2;
        // "auto" or anything unrecognized: fall through to the probe.
    }
    return avx2 != nullptr ? *avx2 : scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& chosen = select();
    return chosen;
}

}  // namespace aschwarz::kern
