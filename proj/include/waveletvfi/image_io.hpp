#pragma once

#include "waveletvfi/tensor.hpp"

#include <string>

namespace wvfi {

// Reads an 8-bit RGB image (PNG or binary PPM "P6") into a 3 x H x W tensor
// with values in [0, 1]. Grayscale PNG is replicated to three channels, RGBA
// drops alpha. Throws on anything unreadable or truncated.
Tensor load_image(const std::string& path);

// Writes PNG or PPM by extension; values clamp to [0, 255] after round-half-up.
void save_image(const Tensor& image, const std::string& path);

} // namespace wvfi
