#pragma once

#include "waveletvfi/tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace wvfi {

struct LossWeights {
    double alpha = 0.01; // frequency reconstruction weight
    double beta = 1.0;   // computation cost weight
    double charbonnier_alpha = 0.5;
    double charbonnier_eps = 1e-3;
};

enum class ThresholdMode { kFixed, kDynamic };

// Architecture and runtime knobs. The channel widths are defaults, not
// contracts: every consumer reads them from here so alternative widths stay a
// config edit.
struct EngineConfig {
    // motion network: two stride-2 convs per encoder level, three convs per
    // decoder, 5-channel head (4 flow + 1 occlusion logit)
    std::array<int, 4> mp_encoder_widths{32, 48, 72, 96};
    int classifier_channels = 24;
    int classifier_hidden = 24;

    // synthesis network: single stride-2 conv per encoder level (wider, fewer
    // convs than the motion net), one feature conv + one coefficient head per
    // decoder
    std::array<int, 4> ws_encoder_widths{40, 60, 90, 120};
    std::array<int, 4> ws_decoder_widths{48, 72, 104, 144};

    // Scale of the random part mixed into the coefficient heads at
    // initialization, relative to their Xavier magnitude. See init_weights.
    float head_init_noise = 0.01f;

    std::vector<float> eta_candidates{0.0f, 0.005f, 0.01f, 0.015f};
    float temperature = 1.0f;
    ThresholdMode mode = ThresholdMode::kFixed;
    float fixed_eta = 0.0f;
    std::uint64_t seed = 1;
    LossWeights loss;

    int num_candidates() const { return static_cast<int>(eta_candidates.size()); }
    void validate() const;
};

// One learnable layer in the fixed enumeration order used by the
// deterministic initializer and the weight file.
struct LayerDef {
    enum class Kind { kConv, kFc };
    std::string name;
    Kind kind = Kind::kConv;
    int out_ch = 0;
    int in_ch = 0;
    int kh = 1;
    int kw = 1;
    int stride = 1;
    int padding = 0;
    // Residual output heads start at zero so the untrained net predicts zero
    // flow and a 0.5 occlusion mask.
    bool zero_init = false;
};

std::vector<LayerDef> layer_plan(const EngineConfig& config);

struct NetworkWeights {
    struct Entry {
        std::string name;
        std::vector<std::uint32_t> dims;
        std::vector<float> data;
    };

    std::vector<Entry> entries;
    std::unordered_map<std::string, std::size_t> index;

    void put(Entry entry);
    bool has(const std::string& name) const { return index.count(name) != 0; }
    const Entry& at(const std::string& name) const;

    // Materialize "<prefix>.weight" / "<prefix>.bias" as a ConvSpec.
    ConvSpec conv(const std::string& prefix, int stride, int padding) const;

    // Checks that every layer required by `config` is present with the right
    // shape (and nothing is missing a bias).
    void validate_against(const EngineConfig& config) const;
};

// Deterministic initialization. Base scheme: weights uniform in
// +-sqrt(6 / (fan_in + fan_out)) drawn from one SplitMix64 stream in
// layer_plan order, biases zero. Two families deviate:
//  - Motion decoder heads start at zero (flow = no motion, occlusion = 0.5),
//    the usual residual-branch zero start.
//  - When the synthesis widths leave room (>= 21 channels per level), the
//    motion-context encoder, decoder feature convs and coefficient heads get
//    a Haar pass-through: the untrained synthesis net then predicts the
//    wavelet coefficients of the merged frame (plus head_init_noise times a
//    random head), so its coefficient maps are structurally sparse on flat
//    content the way trained predictions are, and the untrained pipeline
//    already outputs a sensible frame. Training would simply refine these
//    values; nothing else in the engine depends on them.
NetworkWeights init_weights(const EngineConfig& config, std::uint64_t seed);

void save_weights(const NetworkWeights& weights, const std::string& path);
NetworkWeights load_weights(const std::string& path);

} // namespace wvfi
