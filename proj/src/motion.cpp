#include "waveletvfi/motion.hpp"

#include "waveletvfi/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wvfi {

int ThresholdPolicy::argmax_index() const {
    if (probabilities.empty()) {
        throw std::invalid_argument("ThresholdPolicy: probabilities not set");
    }
    return static_cast<int>(std::max_element(probabilities.begin(), probabilities.end()) -
                            probabilities.begin());
}

void ThresholdPolicy::validate() const {
    if (candidates.empty() || probabilities.size() != candidates.size()) {
        throw std::invalid_argument("ThresholdPolicy: candidate/probability length mismatch");
    }
    double sum = 0.0;
    for (float p : probabilities) {
        if (!(p >= 0.0f)) {
            throw std::invalid_argument("ThresholdPolicy: negative probability");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-5) {
        throw std::invalid_argument("ThresholdPolicy: probabilities must sum to 1");
    }
    if (mode == Mode::kTrainSoft && !(temperature > 0.0f)) {
        throw std::invalid_argument("ThresholdPolicy: temperature must be positive");
    }
}

Tensor backward_warp(const Tensor& image, const Tensor& flow) {
    if (flow.channels != 2 || flow.height != image.height || flow.width != image.width) {
        throw std::invalid_argument("backward_warp: flow must be 2 x H x W matching the image");
    }
    Tensor out(image.channels, image.height, image.width);
    const float* u = flow.plane(0);
    const float* v = flow.plane(1);
    const int h = image.height, w = image.width;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const float xs = static_cast<float>(x) + u[i];
            const float ys = static_cast<float>(y) + v[i];
            const int x0 = static_cast<int>(std::floor(xs));
            const int y0 = static_cast<int>(std::floor(ys));
            const float fx = xs - static_cast<float>(x0);
            const float fy = ys - static_cast<float>(y0);
            const float wts[4] = {(1.0f - fx) * (1.0f - fy), fx * (1.0f - fy),
                                  (1.0f - fx) * fy, fx * fy};
            const int xs4[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys4[4] = {y0, y0, y0 + 1, y0 + 1};
            for (int c = 0; c < image.channels; ++c) {
                const float* src = image.plane(c);
                float acc = 0.0f;
                for (int t = 0; t < 4; ++t) {
                    if (xs4[t] < 0 || xs4[t] >= w || ys4[t] < 0 || ys4[t] >= h) continue;
                    if (wts[t] == 0.0f) continue; // keeps the identity warp exact
                    acc += wts[t] * src[static_cast<std::size_t>(ys4[t]) * w + xs4[t]];
                }
                out.plane(c)[i] = acc;
            }
        }
    }
    return out;
}

Tensor occlusion_merge(const Tensor& warped0, const Tensor& warped1, const Tensor& occ) {
    if (!warped0.same_shape(warped1)) {
        throw std::invalid_argument("occlusion_merge: warped frames disagree on shape");
    }
    if (occ.channels != 1 || occ.height != warped0.height || occ.width != warped0.width) {
        throw std::invalid_argument("occlusion_merge: occlusion must be 1 x H x W");
    }
    Tensor out(warped0.channels, warped0.height, warped0.width);
    const float* o = occ.plane(0);
    const std::size_t plane = static_cast<std::size_t>(out.height) * out.width;
    for (int c = 0; c < out.channels; ++c) {
        const float* a = warped0.plane(c);
        const float* b = warped1.plane(c);
        float* dst = out.plane(c);
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = o[i] * a[i] + (1.0f - o[i]) * b[i];
        }
    }
    return out;
}

FlowField resize_flow(const FlowField& flow, float factor) {
    return FlowField{scale(resize_bilinear(flow.to0, factor), factor),
                     scale(resize_bilinear(flow.to1, factor), factor)};
}

namespace {

std::vector<float> apply_fc(const std::vector<float>& x, const NetworkWeights::Entry& w,
                            const NetworkWeights::Entry& b) {
    const int out = static_cast<int>(w.dims[0]);
    const int in = static_cast<int>(w.dims[1]);
    if (static_cast<int>(x.size()) != in) {
        throw std::invalid_argument("fc: input length mismatch");
    }
    std::vector<float> y(out);
    for (int o = 0; o < out; ++o) {
        float acc = b.data[o];
        const float* row = w.data.data() + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    return y;
}

std::vector<float> leaky_relu_vec(std::vector<float> x, float slope = 0.1f) {
    for (float& v : x) {
        const float sx = slope * v;
        v = (sx > v) ? sx : v;
    }
    return x;
}

std::vector<float> global_average_pool(const Tensor& t) {
    std::vector<float> out(t.channels);
    const std::size_t plane = static_cast<std::size_t>(t.height) * t.width;
    for (int c = 0; c < t.channels; ++c) {
        double acc = 0.0;
        const float* p = t.plane(c);
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        out[c] = static_cast<float>(acc / static_cast<double>(plane));
    }
    return out;
}

std::array<Tensor, 4> encode_pyramid(const Tensor& image, const NetworkWeights& weights,
                                     const char* prefix) {
    std::array<Tensor, 4> feats;
    Tensor x = image;
    for (int l = 1; l <= 4; ++l) {
        const std::string base = std::string(prefix) + ".l" + std::to_string(l);
        x = leaky_relu(conv2d(x, weights.conv(base + ".conv0", 2, 1)));
        x = leaky_relu(conv2d(x, weights.conv(base + ".conv1", 1, 1)));
        feats[l - 1] = x;
    }
    return feats;
}

} // namespace

MotionResult mpnet_forward(const Tensor& i0, const Tensor& i1, const NetworkWeights& weights,
                           const EngineConfig& config) {
    (void)config; // layer shapes come from the weights themselves
    if (i0.channels != 3 || !i0.same_shape(i1)) {
        throw std::invalid_argument("mpnet_forward: inputs must be matching 3 x H x W tensors");
    }
    if (i0.height % 16 != 0 || i0.width % 16 != 0) {
        throw std::invalid_argument("mpnet_forward: dims must be divisible by 16");
    }

    const auto phi0 = encode_pyramid(i0, weights, "mp.enc");
    const auto phi1 = encode_pyramid(i1, weights, "mp.enc");

    Tensor flow;   // 4 x h_l x w_l, to0 then to1, level-l pixel units
    Tensor occ;    // 1 x h_l x w_l occlusion logits
    std::vector<float> logits;

    for (int l = 4; l >= 1; --l) {
        const std::string base = "mp.dec.l" + std::to_string(l);
        Tensor x;
        if (l == 4) {
            x = concat_channels({&phi0[3], &phi1[3]});
        } else {
            Tensor up_flow = scale(resize_bilinear(flow, 2.0f), 2.0f);
            Tensor up_occ = resize_bilinear(occ, 2.0f);
            Tensor warped0 = backward_warp(phi0[l - 1], slice_channels(up_flow, 0, 2));
            Tensor warped1 = backward_warp(phi1[l - 1], slice_channels(up_flow, 2, 2));
            x = concat_channels({&up_flow, &up_occ, &warped0, &warped1});
            flow = std::move(up_flow);
        }
        Tensor t = leaky_relu(conv2d(x, weights.conv(base + ".conv0", 1, 1)));
        Tensor t2 = leaky_relu(conv2d(t, weights.conv(base + ".conv1", 1, 1)));
        Tensor head = conv2d(t2, weights.conv(base + ".head", 1, 1));
        Tensor res_flow = slice_channels(head, 0, 4);
        occ = slice_channels(head, 4, 1);
        flow = (l == 4) ? std::move(res_flow) : add(flow, res_flow);

        if (l == 4) {
            // classifier taps the second-last conv activations of decoder 4
            Tensor cls = leaky_relu(conv2d(t2, weights.conv("mp.cls.conv", 1, 1)));
            std::vector<float> pooled = global_average_pool(cls);
            std::vector<float> hidden = leaky_relu_vec(
                apply_fc(pooled, weights.at("mp.cls.fc0.weight"), weights.at("mp.cls.fc0.bias")));
            logits =
                apply_fc(hidden, weights.at("mp.cls.fc1.weight"), weights.at("mp.cls.fc1.bias"));
        }
    }

    Tensor full_flow = scale(resize_bilinear(flow, 2.0f), 2.0f);
    Tensor occlusion = sigmoid(resize_bilinear(occ, 2.0f));
    FlowField field{slice_channels(full_flow, 0, 2), slice_channels(full_flow, 2, 2)};
    Tensor warped0 = backward_warp(i0, field.to0);
    Tensor warped1 = backward_warp(i1, field.to1);
    Tensor merged = occlusion_merge(warped0, warped1, occlusion);

    MotionResult result;
    result.estimate = MotionEstimate{std::move(field), std::move(occlusion), std::move(merged)};
    result.logits = std::move(logits);
    return result;
}

ThresholdPolicy gumbel_sample(const ThresholdPolicy& policy, std::uint64_t seed) {
    policy.validate();
    ThresholdPolicy out = policy;
    const std::size_t m = policy.probabilities.size();
    out.sample.assign(m, 0.0f);

    if (policy.mode == ThresholdPolicy::Mode::kInferArgmax) {
        out.sample[out.argmax_index()] = 1.0f;
        return out;
    }

    SplitMix64 rng(seed);
    std::vector<double> z(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double u = rng.uniform_open();
        const double g = -std::log(-std::log(u));
        const double log_pi =
            policy.probabilities[k] > 0.0f
                ? std::log(static_cast<double>(policy.probabilities[k]))
                : -std::numeric_limits<double>::infinity();
        z[k] = (log_pi + g) / static_cast<double>(policy.temperature);
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        denom += v;
    }
    for (std::size_t k = 0; k < m; ++k) {
        out.sample[k] = static_cast<float>(z[k] / denom);
    }
    return out;
}

std::vector<float> softmax(const std::vector<float>& logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax: empty input");
    }
    const float m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> e(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        e[i] = std::exp(static_cast<double>(logits[i]) - m);
        denom += e[i];
    }
    std::vector<float> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = static_cast<float>(e[i] / denom);
    }
    return out;
}

float anneal_temperature(int step, int total_steps, float tau_start, float tau_end) {
    if (total_steps <= 1) return tau_end;
    const float t = std::clamp(static_cast<float>(step) / static_cast<float>(total_steps - 1),
                               0.0f, 1.0f);
    return tau_start + (tau_end - tau_start) * t;
}

} // namespace wvfi
