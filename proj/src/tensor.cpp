#include "waveletvfi/tensor.hpp"

#include "waveletvfi/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wvfi {

Tensor::Tensor(int c, int h, int w, float fill)
    : channels(c), height(h), width(w),
      data(static_cast<std::size_t>(c) * h * w, fill) {
    if (c < 0 || h < 0 || w < 0) {
        throw std::invalid_argument("Tensor: negative dimension");
    }
}

void ConvSpec::validate() const {
    if (in_channels <= 0 || out_channels <= 0 || kh <= 0 || kw <= 0 ||
        stride <= 0 || padding < 0) {
        throw std::invalid_argument("ConvSpec: invalid geometry");
    }
    const std::size_t want =
        static_cast<std::size_t>(out_channels) * in_channels * kh * kw;
    if (weights.size() != want) {
        throw std::invalid_argument("ConvSpec: weights size " +
                                    std::to_string(weights.size()) + ", expected " +
                                    std::to_string(want));
    }
    if (bias.size() != static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("ConvSpec: bias size mismatch");
    }
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
    spec.validate();
    if (input.channels != spec.in_channels) {
        throw std::invalid_argument("conv2d: input has " + std::to_string(input.channels) +
                                    " channels, spec expects " +
                                    std::to_string(spec.in_channels));
    }
    const int oh = spec.out_dim(input.height, spec.kh);
    const int ow = spec.out_dim(input.width, spec.kw);
    if (oh <= 0 || ow <= 0) {
        throw std::invalid_argument("conv2d: non-positive output dims");
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
    args.stride = spec.stride;
    args.pad = spec.padding;
    args.output = out.data.data();
    args.out_h = oh;
    args.out_w = ow;
    kernels::conv2d(args);
    return out;
}

Tensor leaky_relu(const Tensor& input, float slope) {
    Tensor out(input.channels, input.height, input.width);
    kernels::leaky_relu(input.data.data(), out.data.data(), input.size(), slope);
    return out;
}

// Half-pixel-center sampling: source coordinate of output i is
// (i + 0.5) / scale - 0.5; taps clamp to the border. Constants map to
// constants and scale 1 is the identity.
Tensor resize_bilinear(const Tensor& input, float scale) {
    if (!(scale > 0.0f)) {
        throw std::invalid_argument("resize_bilinear: scale must be positive");
    }
    const int oh = static_cast<int>(std::lround(input.height * static_cast<double>(scale)));
    const int ow = static_cast<int>(std::lround(input.width * static_cast<double>(scale)));
    if (oh < 1 || ow < 1) {
        throw std::invalid_argument("resize_bilinear: degenerate output size");
    }
    if (oh == input.height && ow == input.width && scale == 1.0f) {
        return input;
    }
    Tensor out(input.channels, oh, ow);
    const double inv = 1.0 / static_cast<double>(scale);
    std::vector<int> x0s(ow), x1s(ow);
    std::vector<float> fxs(ow);
    for (int x = 0; x < ow; ++x) {
        const double sx = (x + 0.5) * inv - 0.5;
        int x0 = static_cast<int>(std::floor(sx));
        const float fx = static_cast<float>(sx - x0);
        int x1 = x0 + 1;
        if (x0 < 0) x0 = 0;
        if (x0 > input.width - 1) x0 = input.width - 1;
        if (x1 < 0) x1 = 0;
        if (x1 > input.width - 1) x1 = input.width - 1;
        x0s[x] = x0;
        x1s[x] = x1;
        fxs[x] = fx;
    }
    for (int c = 0; c < input.channels; ++c) {
        const float* src = input.plane(c);
        float* dst = out.plane(c);
        for (int y = 0; y < oh; ++y) {
            const double sy = (y + 0.5) * inv - 0.5;
            int y0 = static_cast<int>(std::floor(sy));
            const float fy = static_cast<float>(sy - y0);
            int y1 = y0 + 1;
            if (y0 < 0) y0 = 0;
            if (y0 > input.height - 1) y0 = input.height - 1;
            if (y1 < 0) y1 = 0;
            if (y1 > input.height - 1) y1 = input.height - 1;
            const float* r0 = src + static_cast<std::size_t>(y0) * input.width;
            const float* r1 = src + static_cast<std::size_t>(y1) * input.width;
            for (int x = 0; x < ow; ++x) {
                const float fx = fxs[x];
                const float top = r0[x0s[x]] * (1.0f - fx) + r0[x1s[x]] * fx;
                const float bot = r1[x0s[x]] * (1.0f - fx) + r1[x1s[x]] * fx;
                dst[static_cast<std::size_t>(y) * ow + x] = top * (1.0f - fy) + bot * fy;
            }
        }
    }
    return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
    if (parts.empty()) {
        throw std::invalid_argument("concat_channels: no parts");
    }
    const int h = parts[0].height, w = parts[0].width;
    int c_total = 0;
    for (const Tensor& p : parts) {
        if (p.height != h || p.width != w) {
            throw std::invalid_argument("concat_channels: spatial mismatch");
        }
        c_total += p.channels;
    }
    Tensor out(c_total, h, w);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        std::copy(p.data.begin(), p.data.end(), out.data.begin() + off);
        off += p.data.size();
    }
    return out;
}

Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
    if (parts.size() == 0) {
        throw std::invalid_argument("concat_channels: no parts");
    }
    const Tensor& first = **parts.begin();
    int c_total = 0;
    for (const Tensor* p : parts) {
        if (p->height != first.height || p->width != first.width) {
            throw std::invalid_argument("concat_channels: spatial mismatch");
        }
        c_total += p->channels;
    }
    Tensor out(c_total, first.height, first.width);
    std::size_t off = 0;
    for (const Tensor* p : parts) {
        std::copy(p->data.begin(), p->data.end(), out.data.begin() + off);
        off += p->data.size();
    }
    return out;
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor scale(const Tensor& a, float s) {
    Tensor out = a;
    for (float& v : out.data) v *= s;
    return out;
}

Tensor sigmoid(const Tensor& a) {
    Tensor out = a;
    for (float& v : out.data) v = 1.0f / (1.0f + std::exp(-v));
    return out;
}

void accumulate_scaled(Tensor& dst, const Tensor& src, float s) {
    check_same_shape(dst, src, "accumulate_scaled");
    kernels::weighted_accum(dst.data.data(), src.data.data(), s, dst.size());
}

Tensor slice_channels(const Tensor& t, int first, int count) {
    if (first < 0 || count <= 0 || first + count > t.channels) {
        throw std::invalid_argument("slice_channels: range out of bounds");
    }
    Tensor out(count, t.height, t.width);
    std::copy(t.plane(first), t.plane(first) + out.size(), out.data.begin());
    return out;
}

bool all_finite(const Tensor& t) {
    for (float v : t.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace wvfi
