#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace wvfi::kernels::detail {
namespace {

// Deinterleave helpers. Loads cover exactly the span of taps they need so the
// vector path never reads past the last scalar tap.
inline __m256 load_stride1(const float* p) { return _mm256_loadu_ps(p); }

inline __m256 load_stride2(const float* p) {
    const __m256 v0 = _mm256_loadu_ps(p);     // x0..x7
    const __m256 v1 = _mm256_loadu_ps(p + 7); // x7..x14
    // evens of v0 and odds of v1 give x0,x2,...,x14 after a 64-bit reorder
    const __m256 mixed = _mm256_shuffle_ps(v0, v1, _MM_SHUFFLE(3, 1, 2, 0));
    return _mm256_castpd_ps(
        _mm256_permute4x64_pd(_mm256_castps_pd(mixed), _MM_SHUFFLE(3, 1, 2, 0)));
}

inline __m256 mask_to_ps(const std::uint8_t* m) {
    const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(m));
    const __m256i lanes = _mm256_cvtepu8_epi32(bytes);
    return _mm256_castsi256_ps(_mm256_cmpgt_epi32(lanes, _mm256_setzero_si256()));
}

void conv2d_avx2(const Conv2dArgs& a) {
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

            if (!vec_stride || hi_incl - lo + 1 < 8) {
                scalar_span(0, a.out_w);
                continue;
            }

            scalar_span(0, lo);
            int ox = lo;
            const int iy0 = oy * a.stride - a.pad;
            for (; ox + 8 <= hi_incl + 1; ox += 8) {
                __m256 keep{};
                if (mask_row) {
                    keep = mask_to_ps(mask_row + ox);
                    if (_mm256_movemask_ps(keep) == 0) {
                        _mm256_storeu_ps(out_row + ox, _mm256_setzero_ps());
                        continue;
                    }
                }
                __m256 acc = _mm256_set1_ps(a.bias ? a.bias[o] : 0.0f);
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
                            const __m256 w = _mm256_set1_ps(w_row[kx]);
                            const float* p = in_row + ix_base + kx;
                            const __m256 x = (a.stride == 1) ? load_stride1(p) : load_stride2(p);
                            acc = _mm256_add_ps(acc, _mm256_mul_ps(w, x));
                        }
                    }
                }
                if (mask_row) acc = _mm256_and_ps(acc, keep);
                _mm256_storeu_ps(out_row + ox, acc);
            }
            scalar_span(ox, a.out_w);
        }
    }
}

void leaky_relu_avx2(const float* in, float* out, std::size_t n, float slope) {
    const __m256 s = _mm256_set1_ps(slope);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_loadu_ps(in + i);
        _mm256_storeu_ps(out + i, _mm256_max_ps(_mm256_mul_ps(s, x), x));
    }
    for (; i < n; ++i) {
        const float sx = slope * in[i];
        out[i] = (sx > in[i]) ? sx : in[i];
    }
}

// 4 coefficient columns at a time, double accumulation as in the scalar path.
void dwt_avx2(const float* src, int h, int w, float* ll, float* lh, float* hl, float* hh) {
    const int hh2 = h / 2, hw2 = w / 2;
    const __m256d half = _mm256_set1_pd(0.5);
    for (int i = 0; i < hh2; ++i) {
        const float* r0 = src + static_cast<std::size_t>(2 * i) * w;
        const float* r1 = r0 + w;
        const std::size_t off = static_cast<std::size_t>(i) * hw2;
        int j = 0;
        for (; j + 4 <= hw2; j += 4) {
            const __m128 e0 = _mm_loadu_ps(r0 + 2 * j);
            const __m128 o0 = _mm_loadu_ps(r0 + 2 * j + 4);
            const __m128 e1 = _mm_loadu_ps(r1 + 2 * j);
            const __m128 o1 = _mm_loadu_ps(r1 + 2 * j + 4);
            const __m256d a = _mm256_cvtps_pd(_mm_shuffle_ps(e0, o0, _MM_SHUFFLE(2, 0, 2, 0)));
            const __m256d b = _mm256_cvtps_pd(_mm_shuffle_ps(e0, o0, _MM_SHUFFLE(3, 1, 3, 1)));
            const __m256d c = _mm256_cvtps_pd(_mm_shuffle_ps(e1, o1, _MM_SHUFFLE(2, 0, 2, 0)));
            const __m256d d = _mm256_cvtps_pd(_mm_shuffle_ps(e1, o1, _MM_SHUFFLE(3, 1, 3, 1)));
            const __m256d vll = _mm256_mul_pd(_mm256_add_pd(_mm256_add_pd(a, b), _mm256_add_pd(c, d)), half);
            const __m256d vlh = _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(b, a), _mm256_sub_pd(d, c)), half);
            const __m256d vhl = _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(c, a), _mm256_sub_pd(d, b)), half);
            const __m256d vhh = _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(a, b), _mm256_sub_pd(d, c)), half);
            _mm_storeu_ps(ll + off + j, _mm256_cvtpd_ps(vll));
            _mm_storeu_ps(lh + off + j, _mm256_cvtpd_ps(vlh));
            _mm_storeu_ps(hl + off + j, _mm256_cvtpd_ps(vhl));
            _mm_storeu_ps(hh + off + j, _mm256_cvtpd_ps(vhh));
        }
        for (; j < hw2; ++j) {
            const double a = r0[2 * j], b = r0[2 * j + 1];
            const double c = r1[2 * j], d = r1[2 * j + 1];
            ll[off + j] = static_cast<float>(((a + b) + (c + d)) * 0.5);
            lh[off + j] = static_cast<float>(((b - a) + (d - c)) * 0.5);
            hl[off + j] = static_cast<float>(((c - a) + (d - b)) * 0.5);
            hh[off + j] = static_cast<float>(((a - b) + (d - c)) * 0.5);
        }
    }
}

void idwt_avx2(const float* ll, const float* lh, const float* hl, const float* hh,
               int half_h, int half_w, float* dst) {
    const int w = 2 * half_w;
    const __m256d half = _mm256_set1_pd(0.5);
    for (int i = 0; i < half_h; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * half_w;
        float* r0 = dst + static_cast<std::size_t>(2 * i) * w;
        float* r1 = r0 + w;
        int j = 0;
        for (; j + 4 <= half_w; j += 4) {
            const __m256d sll = _mm256_cvtps_pd(_mm_loadu_ps(ll + off + j));
            const __m256d slh = _mm256_cvtps_pd(_mm_loadu_ps(lh + off + j));
            const __m256d shl = _mm256_cvtps_pd(_mm_loadu_ps(hl + off + j));
            const __m256d shh = _mm256_cvtps_pd(_mm_loadu_ps(hh + off + j));
            const __m128 va = _mm256_cvtpd_ps(_mm256_mul_pd(
                _mm256_add_pd(_mm256_sub_pd(sll, slh), _mm256_sub_pd(shh, shl)), half));
            const __m128 vb = _mm256_cvtpd_ps(_mm256_mul_pd(
                _mm256_sub_pd(_mm256_add_pd(sll, slh), _mm256_add_pd(shl, shh)), half));
            const __m128 vc = _mm256_cvtpd_ps(_mm256_mul_pd(
                _mm256_add_pd(_mm256_sub_pd(sll, slh), _mm256_sub_pd(shl, shh)), half));
            const __m128 vd = _mm256_cvtpd_ps(_mm256_mul_pd(
                _mm256_add_pd(_mm256_add_pd(sll, slh), _mm256_add_pd(shl, shh)), half));
            _mm_storeu_ps(r0 + 2 * j, _mm_unpacklo_ps(va, vb));
            _mm_storeu_ps(r0 + 2 * j + 4, _mm_unpackhi_ps(va, vb));
            _mm_storeu_ps(r1 + 2 * j, _mm_unpacklo_ps(vc, vd));
            _mm_storeu_ps(r1 + 2 * j + 4, _mm_unpackhi_ps(vc, vd));
        }
        for (; j < half_w; ++j) {
            const double sll = ll[off + j], slh = lh[off + j];
            const double shl = hl[off + j], shh = hh[off + j];
            r0[2 * j] = static_cast<float>(((sll - slh) + (shh - shl)) * 0.5);
            r0[2 * j + 1] = static_cast<float>(((sll + slh) - (shl + shh)) * 0.5);
            r1[2 * j] = static_cast<float>(((sll - slh) + (shl - shh)) * 0.5);
            r1[2 * j + 1] = static_cast<float>(((sll + slh) + (shl + shh)) * 0.5);
        }
    }
}

void weighted_accum_avx2(float* acc, const float* x, float w, std::size_t n) {
    const __m256 vw = _mm256_set1_ps(w);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(acc + i);
        const __m256 vx = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(acc + i, _mm256_add_ps(va, _mm256_mul_ps(vw, vx)));
    }
    for (; i < n; ++i) acc[i] += w * x[i];
}

} // namespace

const KernelTable kAvx2Table = {
    conv2d_avx2,
    leaky_relu_avx2,
    dwt_avx2,
    idwt_avx2,
    weighted_accum_avx2,
};

} // namespace wvfi::kernels::detail

#endif // x86_64
