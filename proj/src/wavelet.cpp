#include "waveletvfi/wavelet.hpp"

#include "waveletvfi/kernels.hpp"

#include <stdexcept>
#include <string>

namespace wvfi {

void WaveletBand::validate() const {
    if (!ll.same_shape(lh) || !ll.same_shape(hl) || !ll.same_shape(hh)) {
        throw std::invalid_argument("WaveletBand: bands disagree on shape");
    }
}

WaveletBand dwt_haar(const Tensor& image) {
    if (image.height % 2 != 0 || image.width % 2 != 0) {
        throw std::invalid_argument("dwt_haar: odd dimensions");
    }
    const int hh = image.height / 2, hw = image.width / 2;
    WaveletBand band{Tensor(image.channels, hh, hw), Tensor(image.channels, hh, hw),
                     Tensor(image.channels, hh, hw), Tensor(image.channels, hh, hw)};
    for (int c = 0; c < image.channels; ++c) {
        kernels::dwt_haar_plane(image.plane(c), image.height, image.width,
                                band.ll.plane(c), band.lh.plane(c),
                                band.hl.plane(c), band.hh.plane(c));
    }
    return band;
}

Tensor idwt_haar(const WaveletBand& band) {
    band.validate();
    const Tensor& ll = band.ll;
    Tensor out(ll.channels, 2 * ll.height, 2 * ll.width);
    for (int c = 0; c < ll.channels; ++c) {
        kernels::idwt_haar_plane(band.ll.plane(c), band.lh.plane(c), band.hl.plane(c),
                                 band.hh.plane(c), ll.height, ll.width, out.plane(c));
    }
    return out;
}

WaveletPyramid decompose(const Tensor& image, int levels) {
    if (levels < 1) {
        throw std::invalid_argument("decompose: levels must be >= 1");
    }
    const int div = 1 << levels;
    if (image.height % div != 0 || image.width % div != 0) {
        throw std::invalid_argument("decompose: dims " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + " not divisible by " +
                                    std::to_string(div));
    }
    WaveletPyramid pyr;
    pyr.original_height = image.height;
    pyr.original_width = image.width;
    pyr.levels.reserve(levels);
    const Tensor* current = &image;
    for (int l = 0; l < levels; ++l) {
        pyr.levels.push_back(dwt_haar(*current));
        current = &pyr.levels.back().ll;
    }
    return pyr;
}

Tensor reconstruct(const WaveletPyramid& pyramid) {
    if (pyramid.levels.empty()) {
        throw std::invalid_argument("reconstruct: empty pyramid");
    }
    for (std::size_t l = 0; l + 1 < pyramid.levels.size(); ++l) {
        const Tensor& coarser_ll = pyramid.levels[l + 1].ll;
        const Tensor& finer_ll = pyramid.levels[l].ll;
        if (coarser_ll.height * 2 != finer_ll.height ||
            coarser_ll.width * 2 != finer_ll.width ||
            coarser_ll.channels != finer_ll.channels) {
            throw std::invalid_argument("reconstruct: malformed pyramid");
        }
    }
    // Deepest level synthesises from its stored LL; every shallower level
    // substitutes the running reconstruction for its LL.
    Tensor ll = pyramid.levels.back().ll;
    for (int l = pyramid.depth() - 1; l >= 0; --l) {
        const WaveletBand& band = pyramid.levels[l];
        WaveletBand working{std::move(ll), band.lh, band.hl, band.hh};
        ll = idwt_haar(working);
    }
    return ll;
}

} // namespace wvfi
