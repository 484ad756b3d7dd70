#pragma once

#include "waveletvfi/config.hpp"
#include "waveletvfi/flops.hpp"
#include "waveletvfi/motion.hpp"
#include "waveletvfi/sparse.hpp"
#include "waveletvfi/wavelet.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wvfi {

// Flow-aligned context features per pyramid level: warped features from each
// input frame concatenated with motion-context features.
struct ContextPyramid {
    std::array<Tensor, 4> level; // index l-1, spatial dims H/2^l
    std::vector<FlopsEntry> encoder_entries;
    int input_height = 0;
    int input_width = 0;
};

enum class MaskSource {
    kFromEta,  // Eq.-style thresholding of the coarser level's coefficients
    kAllValid, // forced-dense reference path for equivalence tests
};

struct SynthesisResult {
    Tensor frame;                  // reconstructed LL^0, 3 x H x W
    WaveletPyramid pyramid;        // predicted coefficients, levels 1..4
    std::array<ValidMask, 3> masks; // index l-1 for levels 1..3
    std::int64_t flops = 0;        // charged synthesis-network FLOPs
    float eta_used = 0.0f;
    std::vector<FlopsEntry> entries; // encoder + decoder ledger entries
};

ContextPyramid encode_context(const Tensor& i0, const Tensor& i1, const MotionEstimate& motion,
                              const NetworkWeights& weights, const EngineConfig& config);

SynthesisResult wsnet_reconstruct(const ContextPyramid& ctx, float eta,
                                  const NetworkWeights& weights, const EngineConfig& config,
                                  MaskSource mask_source = MaskSource::kFromEta);

// Candidate-weighted combination: frame and every coefficient map are the
// h-weighted sums over candidates, charged FLOPs the h-weighted total. Masks
// and ledger entries are taken from the heaviest candidate.
SynthesisResult mix_candidates(const std::vector<SynthesisResult>& results,
                               const std::vector<float>& h,
                               const std::vector<float>& candidates);

struct InterpolateResult {
    SynthesisResult synthesis;
    MotionEstimate motion;
    ThresholdPolicy policy; // probabilities and sample filled
    std::vector<std::int64_t> candidate_flops;
};

// Full pipeline. Argmax mode runs the synthesis network once with the most
// probable candidate; train-soft mode runs every candidate and mixes them
// with the Gumbel-softmax sample. If the policy arrives without
// probabilities, the threshold classifier's output fills them.
InterpolateResult interpolate(const Tensor& i0, const Tensor& i1, const ThresholdPolicy& policy,
                              const NetworkWeights& weights, const EngineConfig& config,
                              std::uint64_t seed);

// Full-pipeline ledger: motion network and context encoders charged dense,
// decoder layers at their mask densities.
FlopsLedger ledger_for_synthesis(const SynthesisResult& result, const EngineConfig& config);

} // namespace wvfi
