// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace pointmatch::kernels {
namespace {

const Backend* pick_default() {
    if (const char* env = std::getenv("POINTMATCH_KERNELS")) {
        std::string want(env);
        if (want == "scalar") return &scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
        if (want == "avx2" && avx2_available()) return &avx2_backend();
#endif
        // unknown or unsupported value: fall through to auto
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return &avx2_backend();
#endif
    return &scalar_backend();
}

const Backend*& active_ptr() {
    static const Backend* p = pick_default();
    return p;
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Backend& active() { return *active_ptr(); }

void set_backend(const std::string& name) {
    if (name == "scalar") {
        active_ptr() = &scalar_backend();
    } else if (name == "avx2") {
#if defined(__x86_64__) || defined(_M_X64)
        if (!avx2_available()) throw std::runtime_error("kernels: avx2 not supported on this CPU");
        active_ptr() = &avx2_backend();
#else
        throw std::runtime_error("kernels: avx2 backend not built on this architecture");
#endif
    } else if (name == "auto") {
#if defined(__x86_64__) || defined(_M_X64)
        active_ptr() = avx2_available() ? &avx2_backend() : &scalar_backend();
#else
        active_ptr() = &scalar_backend();
#endif
    } else {
        throw std::runtime_error("kernels: unknown backend '" + name + "'");
    }
}

}  // namespace pointmatch::kernels
