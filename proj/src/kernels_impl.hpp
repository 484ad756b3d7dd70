#pragma once

#include "waveletvfi/kernels.hpp"

namespace wvfi::kernels::detail {

struct KernelTable {
    void (*conv2d)(const Conv2dArgs&);
    void (*leaky_relu)(const float*, float*, std::size_t, float);
    void (*dwt)(const float*, int, int, float*, float*, float*, float*);
    void (*idwt)(const float*, const float*, const float*, const float*, int, int, float*);
    void (*weighted_accum)(float*, const float*, float, std::size_t);
};

extern const KernelTable kScalarTable;

// Named so other backends can reuse them in their tables.
void scalar_dwt(const float* src, int h, int w, float* ll, float* lh, float* hl, float* hh);
void scalar_idwt(const float* ll, const float* lh, const float* hl, const float* hh,
                 int half_h, int half_w, float* dst);

#if defined(__x86_64__) || defined(_M_X64)
#define WVFI_HAVE_AVX2_BUILD 1
extern const KernelTable kAvx2Table;
#endif

#if defined(__ARM_NEON) || defined(__ARM_NEON__)
#define WVFI_HAVE_NEON_BUILD 1
extern const KernelTable kNeonTable;
#endif

// Scalar fallback for a single output position; SIMD variants call this on
// borders and ragged tails so every backend computes borders identically.
inline float conv2d_at(const Conv2dArgs& a, int o, int oy, int ox) {
    float acc = a.bias ? a.bias[o] : 0.0f;
    const int iy0 = oy * a.stride - a.pad;
    const int ix0 = ox * a.stride - a.pad;
    for (int c = 0; c < a.in_ch; ++c) {
        const float* in_plane = a.input + static_cast<std::size_t>(c) * a.in_h * a.in_w;
        const float* w_base = a.weights + ((static_cast<std::size_t>(o) * a.in_ch + c) * a.kh) * a.kw;
        for (int ky = 0; ky < a.kh; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= a.in_h) continue;
            const float* in_row = in_plane + static_cast<std::size_t>(iy) * a.in_w;
            const float* w_row = w_base + static_cast<std::size_t>(ky) * a.kw;
            for (int kx = 0; kx < a.kw; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= a.in_w) continue;
                acc += w_row[kx] * in_row[ix];
            }
        }
    }
    return acc;
}

// First/last output column for which every kx tap is in bounds.
inline void interior_columns(const Conv2dArgs& a, int& lo, int& hi_incl) {
    lo = (a.pad + a.stride - 1) / a.stride;
    hi_incl = (a.in_w - a.kw + a.pad) / a.stride;
    if (hi_incl > a.out_w - 1) hi_incl = a.out_w - 1;
}

} // namespace wvfi::kernels::detail
