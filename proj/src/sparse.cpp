#include "waveletvfi/sparse.hpp"

#include "waveletvfi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wvfi {

double ValidMask::density() const {
    if (bits.empty()) return 0.0;
    std::size_t on = 0;
    for (std::uint8_t b : bits) on += b;
    return static_cast<double>(on) / static_cast<double>(bits.size());
}

ValidMask compute_valid_mask(const WaveletBand& high_bands, const Tensor& ll, float eta) {
    high_bands.validate();
    if (eta < 0.0f) {
        throw std::invalid_argument("compute_valid_mask: eta must be >= 0");
    }
    const Tensor& lh = high_bands.lh;
    if (ll.channels != lh.channels || ll.height != 2 * lh.height || ll.width != 2 * lh.width) {
        throw std::invalid_argument("compute_valid_mask: ll dims must be 2x the band dims");
    }
    ValidMask mask(ll.height, ll.width, 0);
    for (int c = 0; c < ll.channels; ++c) {
        const float* lp = ll.plane(c);
        float lo = lp[0], hi = lp[0];
        const std::size_t n = static_cast<std::size_t>(ll.height) * ll.width;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, lp[i]);
            hi = std::max(hi, lp[i]);
        }
        const float threshold = eta * (hi - lo);
        const float* plh = high_bands.lh.plane(c);
        const float* phl = high_bands.hl.plane(c);
        const float* phh = high_bands.hh.plane(c);
        for (int y = 0; y < lh.height; ++y) {
            for (int x = 0; x < lh.width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * lh.width + x;
                const float mag =
                    std::max(std::fabs(plh[i]), std::max(std::fabs(phl[i]), std::fabs(phh[i])));
                if (mag > threshold) {
                    // nearest-neighbour 2x upsample: coarse bit -> 2x2 block
                    mask.at(2 * y, 2 * x) = 1;
                    mask.at(2 * y, 2 * x + 1) = 1;
                    mask.at(2 * y + 1, 2 * x) = 1;
                    mask.at(2 * y + 1, 2 * x + 1) = 1;
                }
            }
        }
    }
    return mask;
}

ValidMask dilate3(const ValidMask& mask) {
    ValidMask out(mask.height, mask.width, 0);
    for (int y = 0; y < mask.height; ++y) {
        const int y0 = std::max(0, y - 1), y1 = std::min(mask.height - 1, y + 1);
        for (int x = 0; x < mask.width; ++x) {
            const int x0 = std::max(0, x - 1), x1 = std::min(mask.width - 1, x + 1);
            std::uint8_t any = 0;
            for (int yy = y0; yy <= y1 && !any; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    if (mask.at(yy, xx)) {
                        any = 1;
                        break;
                    }
                }
            }
            out.at(y, x) = any;
        }
    }
    return out;
}

Tensor sparse_conv2d(const Tensor& input, const ValidMask& mask, const ConvSpec& spec) {
    spec.validate();
    if (spec.stride != 1) {
        throw std::invalid_argument("sparse_conv2d: stride must be 1");
    }
    if (input.channels != spec.in_channels) {
        throw std::invalid_argument("sparse_conv2d: channel mismatch");
    }
    const int oh = spec.out_dim(input.height, spec.kh);
    const int ow = spec.out_dim(input.width, spec.kw);
    if (oh != mask.height || ow != mask.width) {
        throw std::invalid_argument("sparse_conv2d: mask dims must equal output dims");
    }
    Tensor out(spec.out_channels, oh, ow);
    kernels::Conv2dArgs args;
    args.input = input.data.data();
    args.in_ch = input.channels;
    args.in_h = input.height;
    args.in_w = input.width;
    args.weights = spec.weights.data();
    args.bias = spec.bias.data();
    args.out_ch = spec.out_channels;
    args.kh = spec.kh;
    args.kw = spec.kw;
    args.stride = 1;
    args.pad = spec.padding;
    args.output = out.data.data();
    args.out_h = oh;
    args.out_w = ow;
    args.mask = mask.bits.data();
    kernels::conv2d(args);
    return out;
}

} // namespace wvfi
