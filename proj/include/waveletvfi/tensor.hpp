#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wvfi {

// Dense rank-3 float32 array, channels outermost, row-major within a channel.
// All images, features, flows and coefficient maps use this layout.
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int c, int h, int w, float fill = 0.0f);

    std::size_t size() const { return data.size(); }
    int plane_size() const { return height * width; }

    float* plane(int c) { return data.data() + static_cast<std::size_t>(c) * plane_size(); }
    const float* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * plane_size(); }

    float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    bool same_shape(const Tensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

// Convolution layer description. `weights` is out*in*kh*kw, cross-correlation
// semantics (no kernel flip), zero padding outside the borders.
struct ConvSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kh = 0;
    int kw = 0;
    int stride = 1;
    int padding = 0;
    std::vector<float> weights;
    std::vector<float> bias;

    void validate() const;
    int out_dim(int in_dim, int k) const { return (in_dim + 2 * padding - k) / stride + 1; }
};

Tensor conv2d(const Tensor& input, const ConvSpec& spec);
Tensor leaky_relu(const Tensor& input, float slope = 0.1f);
Tensor resize_bilinear(const Tensor& input, float scale);
Tensor concat_channels(std::span<const Tensor> parts);
Tensor concat_channels(std::initializer_list<const Tensor*> parts);

// Elementwise helpers shared by the network code.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
Tensor sigmoid(const Tensor& a);
// dst += s * src
void accumulate_scaled(Tensor& dst, const Tensor& src, float s);
Tensor slice_channels(const Tensor& t, int first, int count);
bool all_finite(const Tensor& t);

} // namespace wvfi
