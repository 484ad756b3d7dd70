#pragma once

#include "waveletvfi/tensor.hpp"

#include <vector>

namespace wvfi {

// One analysis level: four coefficient maps at half the source resolution.
//
// Orientation convention (fixed): the low/high 1-D filters are
// L = [1 1]/sqrt(2) and H = [-1 1]/sqrt(2); LH applies H along rows (x) and L
// along columns (y), so LH responds to vertical edges, HL to horizontal edges
// and HH to diagonals. The 2-D kernels are the outer products, entries +-1/2,
// making the transform orthonormal and DWT/IDWT exact inverses.
struct WaveletBand {
    Tensor ll, lh, hl, hh;

    void validate() const;
};

// Recursive decomposition: level 1 analyses the image, level l+1 analyses
// level l's LL. Level l tensors are at 1/2^l of the original resolution.
struct WaveletPyramid {
    std::vector<WaveletBand> levels;
    int original_height = 0;
    int original_width = 0;

    int depth() const { return static_cast<int>(levels.size()); }
};

WaveletBand dwt_haar(const Tensor& image);
Tensor idwt_haar(const WaveletBand& band);
WaveletPyramid decompose(const Tensor& image, int levels);
Tensor reconstruct(const WaveletPyramid& pyramid);

} // namespace wvfi
