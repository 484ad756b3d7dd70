#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Arithmetic inner loops. Each kernel has a scalar reference implementation
// and optional SIMD variants selected once at startup. Variants must produce
// bit-identical results: they evaluate the same float operations in the same
// order per output element (the build disables fp contraction), so the
// equivalence tests assert exact equality.
namespace wvfi::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Resolved once per process: WVFI_KERNELS=scalar|avx2|neon overrides, else the
// best supported variant wins.
Backend active_backend();

// Test hook; throws if the variant is not supported on this machine.
void force_backend(Backend b);

struct Conv2dArgs {
    const float* input = nullptr; // in_ch * in_h * in_w
    int in_ch = 0, in_h = 0, in_w = 0;
    const float* weights = nullptr; // out_ch * in_ch * kh * kw
    const float* bias = nullptr;    // out_ch
    int out_ch = 0, kh = 0, kw = 0, stride = 1, pad = 0;
    float* output = nullptr; // out_ch * out_h * out_w
    int out_h = 0, out_w = 0;
    // Optional per-position mask over the output plane (1 = compute). Masked
    // positions are written as exactly 0.
    const std::uint8_t* mask = nullptr;
};

void conv2d(const Conv2dArgs& args);

// out[i] = max(slope * in[i], in[i])
void leaky_relu(const float* in, float* out, std::size_t n, float slope);

// Orthonormal Haar analysis of a single plane (h, w even). Each output is the
// inner product of a non-overlapping 2x2 block with the four +-1/2 kernels;
// accumulation runs in double and rounds once to float.
void dwt_haar_plane(const float* src, int h, int w,
                    float* ll, float* lh, float* hl, float* hh);

// Exact inverse of dwt_haar_plane; half_h/half_w are the coefficient dims.
void idwt_haar_plane(const float* ll, const float* lh, const float* hl, const float* hh,
                     int half_h, int half_w, float* dst);

// acc[i] += w * x[i]
void weighted_accum(float* acc, const float* x, float w, std::size_t n);

} // namespace wvfi::kernels
