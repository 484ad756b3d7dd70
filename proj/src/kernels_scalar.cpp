#include "kernels_impl.hpp"

#include <cstring>

namespace wvfi::kernels::detail {
namespace {

void conv2d_scalar(const Conv2dArgs& a) {
    for (int o = 0; o < a.out_ch; ++o) {
        float* out_plane = a.output + static_cast<std::size_t>(o) * a.out_h * a.out_w;
        for (int oy = 0; oy < a.out_h; ++oy) {
            float* out_row = out_plane + static_cast<std::size_t>(oy) * a.out_w;
            const std::uint8_t* mask_row =
                a.mask ? a.mask + static_cast<std::size_t>(oy) * a.out_w : nullptr;
            for (int ox = 0; ox < a.out_w; ++ox) {
                if (mask_row && !mask_row[ox]) {
                    out_row[ox] = 0.0f;
                    continue;
                }
                out_row[ox] = conv2d_at(a, o, oy, ox);
            }
        }
    }
}

void leaky_relu_scalar(const float* in, float* out, std::size_t n, float slope) {
    for (std::size_t i = 0; i < n; ++i) {
        const float sx = slope * in[i];
        out[i] = (sx > in[i]) ? sx : in[i];
    }
}

} // namespace

void scalar_dwt(const float* src, int h, int w, float* ll, float* lh, float* hl, float* hh) {
    const int hh2 = h / 2, hw2 = w / 2;
    for (int i = 0; i < hh2; ++i) {
        const float* r0 = src + static_cast<std::size_t>(2 * i) * w;
        const float* r1 = r0 + w;
        const std::size_t out_off = static_cast<std::size_t>(i) * hw2;
        for (int j = 0; j < hw2; ++j) {
            const double a = r0[2 * j], b = r0[2 * j + 1];
            const double c = r1[2 * j], d = r1[2 * j + 1];
            ll[out_off + j] = static_cast<float>(((a + b) + (c + d)) * 0.5);
            lh[out_off + j] = static_cast<float>(((b - a) + (d - c)) * 0.5);
            hl[out_off + j] = static_cast<float>(((c - a) + (d - b)) * 0.5);
            hh[out_off + j] = static_cast<float>(((a - b) + (d - c)) * 0.5);
        }
    }
}

void scalar_idwt(const float* ll, const float* lh, const float* hl, const float* hh,
                 int half_h, int half_w, float* dst) {
    const int w = 2 * half_w;
    for (int i = 0; i < half_h; ++i) {
        const std::size_t in_off = static_cast<std::size_t>(i) * half_w;
        float* r0 = dst + static_cast<std::size_t>(2 * i) * w;
        float* r1 = r0 + w;
        for (int j = 0; j < half_w; ++j) {
            const double sll = ll[in_off + j], slh = lh[in_off + j];
            const double shl = hl[in_off + j], shh = hh[in_off + j];
            r0[2 * j] = static_cast<float>(((sll - slh) + (shh - shl)) * 0.5);
            r0[2 * j + 1] = static_cast<float>(((sll + slh) - (shl + shh)) * 0.5);
            r1[2 * j] = static_cast<float>(((sll - slh) + (shl - shh)) * 0.5);
            r1[2 * j + 1] = static_cast<float>(((sll + slh) + (shl + shh)) * 0.5);
        }
    }
}

namespace {

void weighted_accum_scalar(float* acc, const float* x, float w, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * x[i];
}

} // namespace

const KernelTable kScalarTable = {
    conv2d_scalar,
    leaky_relu_scalar,
    scalar_dwt,
    scalar_idwt,
    weighted_accum_scalar,
};

} // namespace wvfi::kernels::detail
