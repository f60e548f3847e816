// Backend selection: scalar reference vs AVX2, decided once at startup from
// CPU support, overridable via SQSS_KERNELS or select_backend().

#include "sqss/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace sqss::qsim::kernels {

const Ops* avx2_ops_table(); // defined in kernels_avx2.cpp

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* avx2_ops() {
    if (!avx2_supported()) return nullptr;
    return avx2_ops_table();
}

namespace {

const Ops* pick_default() {
    if (const char* env = std::getenv("SQSS_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops* t = avx2_ops()) return t;
            throw std::invalid_argument("SQSS_KERNELS=avx2 but AVX2 is unavailable");
        }
    }
    if (const Ops* t = avx2_ops()) return t;
    return &scalar_ops();
}

const Ops*& active_slot() {
    static const Ops* slot = pick_default();
    return slot;
}

} // namespace

const Ops& active() { return *active_slot(); }

Backend active_backend() {
    return active_slot() == &scalar_ops() ? Backend::Scalar : Backend::Avx2;
}

void select_backend(Backend b) {
    switch (b) {
    case Backend::Auto:
        active_slot() = avx2_ops() ? avx2_ops() : &scalar_ops();
        return;
    case Backend::Scalar:
        active_slot() = &scalar_ops();
        return;
    case Backend::Avx2:
        if (const Ops* t = avx2_ops()) {
            active_slot() = t;
            return;
        }
        throw std::invalid_argument("AVX2 kernels unavailable on this machine");
    }
    throw std::invalid_argument("unknown kernel backend");
}

} // namespace sqss::qsim::kernels
