#pragma once

#include "waveletvfi/config.hpp"
#include "waveletvfi/tensor.hpp"

#include <cstdint>
#include <vector>

namespace wvfi {

// Bidirectional intermediate flow at some resolution, pixel units of that
// resolution. Resizing a flow field by s scales the stored displacements by s.
struct FlowField {
    Tensor to0; // 2 x H x W
    Tensor to1; // 2 x H x W
};

struct MotionEstimate {
    FlowField flow;   // at input resolution
    Tensor occlusion; // 1 x H x W, values in [0, 1]
    Tensor merged;    // occ * warp(i0) + (1 - occ) * warp(i1)
};

struct ThresholdPolicy {
    enum class Mode { kTrainSoft, kInferArgmax };

    std::vector<float> candidates{0.0f, 0.005f, 0.01f, 0.015f};
    std::vector<float> probabilities; // pi, on the simplex
    float temperature = 1.0f;
    std::vector<float> sample; // h; one-hot in argmax mode
    Mode mode = Mode::kInferArgmax;

    int argmax_index() const;
    void validate() const;
};

Tensor backward_warp(const Tensor& image, const Tensor& flow);
Tensor occlusion_merge(const Tensor& warped0, const Tensor& warped1, const Tensor& occ);

// Resize a flow field spatially and rescale its displacement values by the
// same factor.
FlowField resize_flow(const FlowField& flow, float scale);

struct MotionResult {
    MotionEstimate estimate;
    std::vector<float> logits; // threshold classifier, length m
};

MotionResult mpnet_forward(const Tensor& i0, const Tensor& i1, const NetworkWeights& weights,
                           const EngineConfig& config);

// Argmax mode picks the most probable candidate with no noise; train-soft
// mode draws seeded Gumbel noise and relaxes the one-hot through a
// temperature softmax.
ThresholdPolicy gumbel_sample(const ThresholdPolicy& policy, std::uint64_t seed);

std::vector<float> softmax(const std::vector<float>& logits);

// Linear temperature schedule from tau_start at step 0 to tau_end at the
// final step; only the demonstration trainer would consume it.
float anneal_temperature(int step, int total_steps, float tau_start = 1.0f,
                         float tau_end = 0.4f);

} // namespace wvfi
