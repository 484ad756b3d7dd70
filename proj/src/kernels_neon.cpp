#include "kernels_impl.hpp"

#if defined(__ARM_NEON) || defined(__ARM_NEON__)

#include <arm_neon.h>

namespace wvfi::kernels::detail {
namespace {

void conv2d_neon(const Conv2dArgs& a) {
    int lo = 0, hi_incl = -1;
    interior_columns(a, lo, hi_incl);
    const bool vec_stride = (a.stride == 1 || a.stride == 2);

    for (int o = 0; o < a.out_ch; ++o) {
        float* out_plane = a.output + static_cast<std::size_t>(o) * a.out_h * a.out_w;
        for (int oy = 0; oy < a.out_h; ++oy) {
            float* out_row = out_plane + static_cast<std::size_t>(oy) * a.out_w;
            const std::uint8_t* mask_row =
                a.mask ? a.mask + static_cast<std::size_t>(oy) * a.out_w : nullptr;

            auto scalar_span = [&](int x0, int x1) {
                for (int ox = x0; ox < x1; ++ox) {
                    if (mask_row && !mask_row[ox]) {
                        out_row[ox] = 0.0f;
                    } else {
                        out_row[ox] = conv2d_at(a, o, oy, ox);
                    }
                }
            };

            if (!vec_stride || hi_incl - lo + 1 < 4) {
                scalar_span(0, a.out_w);
                continue;
            }

            scalar_span(0, lo);
            int ox = lo;
            const int iy0 = oy * a.stride - a.pad;
            for (; ox + 4 <= hi_incl + 1; ox += 4) {
                uint32x4_t keep{};
                if (mask_row) {
                    const std::uint8_t* m = mask_row + ox;
                    const uint32_t lanes[4] = {m[0], m[1], m[2], m[3]};
                    keep = vcgtq_u32(vld1q_u32(lanes), vdupq_n_u32(0));
                    if (vmaxvq_u32(keep) == 0) {
                        vst1q_f32(out_row + ox, vdupq_n_f32(0.0f));
                        continue;
                    }
                }
                float32x4_t acc = vdupq_n_f32(a.bias ? a.bias[o] : 0.0f);
                const int ix_base = ox * a.stride - a.pad;
                for (int c = 0; c < a.in_ch; ++c) {
                    const float* in_plane =
                        a.input + static_cast<std::size_t>(c) * a.in_h * a.in_w;
                    const float* w_base =
                        a.weights + ((static_cast<std::size_t>(o) * a.in_ch + c) * a.kh) * a.kw;
                    for (int ky = 0; ky < a.kh; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= a.in_h) continue;
                        const float* in_row = in_plane + static_cast<std::size_t>(iy) * a.in_w;
                        const float* w_row = w_base + static_cast<std::size_t>(ky) * a.kw;
                        for (int kx = 0; kx < a.kw; ++kx) {
                            const float32x4_t w = vdupq_n_f32(w_row[kx]);
                            const float* p = in_row + ix_base + kx;
                            float32x4_t x;
                            if (a.stride == 1) {
                                x = vld1q_f32(p);
                            } else {
                                const float tmp[4] = {p[0], p[2], p[4], p[6]};
                                x = vld1q_f32(tmp);
                            }
                            acc = vaddq_f32(acc, vmulq_f32(w, x));
                        }
                    }
                }
                if (mask_row) {
                    acc = vreinterpretq_f32_u32(
                        vandq_u32(vreinterpretq_u32_f32(acc), keep));
                }
                vst1q_f32(out_row + ox, acc);
            }
            scalar_span(ox, a.out_w);
        }
    }
}

void leaky_relu_neon(const float* in, float* out, std::size_t n, float slope) {
    const float32x4_t s = vdupq_n_f32(slope);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t x = vld1q_f32(in + i);
        vst1q_f32(out + i, vmaxq_f32(vmulq_f32(s, x), x));
    }
    for (; i < n; ++i) {
        const float sx = slope * in[i];
        out[i] = (sx > in[i]) ? sx : in[i];
    }
}

void weighted_accum_neon(float* acc, const float* x, float w, std::size_t n) {
    const float32x4_t vw = vdupq_n_f32(w);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t va = vld1q_f32(acc + i);
        const float32x4_t vx = vld1q_f32(x + i);
        vst1q_f32(acc + i, vaddq_f32(va, vmulq_f32(vw, vx)));
    }
    for (; i < n; ++i) acc[i] += w * x[i];
}

} // namespace

// Wavelet kernels run in double; the scalar path serves them on NEON builds.
const KernelTable kNeonTable = {
    conv2d_neon,
    leaky_relu_neon,
    scalar_dwt,
    scalar_idwt,
    weighted_accum_neon,
};

} // namespace wvfi::kernels::detail

#endif // __ARM_NEON
