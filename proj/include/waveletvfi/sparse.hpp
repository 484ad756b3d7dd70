#pragma once

#include "waveletvfi/tensor.hpp"
#include "waveletvfi/wavelet.hpp"

#include <cstdint>
#include <vector>

namespace wvfi {

// Binary per-position mask controlling where sparse convolutions compute.
struct ValidMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits; // 1 = compute here

    ValidMask() = default;
    ValidMask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), bits(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return bits[static_cast<std::size_t>(y) * width + x]; }
    double density() const;
};

// Threshold the coarser level's high-frequency magnitudes against
// eta * (per-channel dynamic range of ll), expand each coarse decision to its
// 2x2 children, then union the per-channel masks. A flat ll channel
// (max == min) gets threshold 0, so any strictly nonzero coefficient marks
// its children valid.
ValidMask compute_valid_mask(const WaveletBand& high_bands, const Tensor& ll, float eta);

// 3x3 morphological dilation, zero outside the borders.
ValidMask dilate3(const ValidMask& mask);

// Dense convolution restricted to mask-valid output positions; everything
// else is exactly 0. Requires stride 1 so mask and output dims agree.
Tensor sparse_conv2d(const Tensor& input, const ValidMask& mask, const ConvSpec& spec);

} // namespace wvfi
