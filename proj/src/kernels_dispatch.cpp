#include "kernels_impl.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace wvfi::kernels {

using detail::KernelTable;

namespace {

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::kScalar:
            return &detail::kScalarTable;
        case Backend::kAvx2:
#ifdef WVFI_HAVE_AVX2_BUILD
            return &detail::kAvx2Table;
#else
            return nullptr;
#endif
        case Backend::kNeon:
#ifdef WVFI_HAVE_NEON_BUILD
            return &detail::kNeonTable;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::kScalar:
            return true;
        case Backend::kAvx2:
#ifdef WVFI_HAVE_AVX2_BUILD
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::kNeon:
#ifdef WVFI_HAVE_NEON_BUILD
            return true; // baseline on aarch64
#else
            return false;
#endif
    }
    return false;
}

Backend detect_backend() {
    if (const char* env = std::getenv("WVFI_KERNELS")) {
        const std::string name(env);
        Backend requested;
        if (name == "scalar") {
            requested = Backend::kScalar;
        } else if (name == "avx2") {
            requested = Backend::kAvx2;
        } else if (name == "neon") {
            requested = Backend::kNeon;
        } else {
            throw std::runtime_error("WVFI_KERNELS: unknown backend '" + name + "'");
        }
        if (!cpu_supports(requested)) {
            throw std::runtime_error("WVFI_KERNELS: backend '" + name +
                                     "' not supported on this machine");
        }
        return requested;
    }
    if (cpu_supports(Backend::kAvx2)) return Backend::kAvx2;
    if (cpu_supports(Backend::kNeon)) return Backend::kNeon;
    return Backend::kScalar;
}

Backend g_backend = Backend::kScalar;
const KernelTable* g_table = nullptr;

const KernelTable& table() {
    if (!g_table) {
        g_backend = detect_backend();
        g_table = table_for(g_backend);
    }
    return *g_table;
}

} // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::kScalar: return "scalar";
        case Backend::kAvx2: return "avx2";
        case Backend::kNeon: return "neon";
    }
    return "?";
}

bool backend_supported(Backend b) { return cpu_supports(b); }

Backend active_backend() {
    table();
    return g_backend;
}

void force_backend(Backend b) {
    if (!cpu_supports(b)) {
        throw std::runtime_error(std::string("kernel backend not supported here: ") +
                                 backend_name(b));
    }
    g_backend = b;
    g_table = table_for(b);
}

void conv2d(const Conv2dArgs& args) { table().conv2d(args); }

void leaky_relu(const float* in, float* out, std::size_t n, float slope) {
    table().leaky_relu(in, out, n, slope);
}

void dwt_haar_plane(const float* src, int h, int w,
                    float* ll, float* lh, float* hl, float* hh) {
    table().dwt(src, h, w, ll, lh, hl, hh);
}

void idwt_haar_plane(const float* ll, const float* lh, const float* hl, const float* hh,
                     int half_h, int half_w, float* dst) {
    table().idwt(ll, lh, hl, hh, half_h, half_w, dst);
}

void weighted_accum(float* acc, const float* x, float w, std::size_t n) {
    table().weighted_accum(acc, x, w, n);
}

} // namespace wvfi::kernels
