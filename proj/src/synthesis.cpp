#include "waveletvfi/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wvfi {

namespace {

ValidMask all_valid(int h, int w) { return ValidMask(h, w, 1); }

void add_entry(std::vector<FlopsEntry>& entries, const std::string& name, const ConvSpec& spec,
               int out_h, int out_w, double fraction) {
    const std::int64_t dense = conv_flops(spec, out_h, out_w, 1.0);
    FlopsEntry e;
    e.name = name;
    e.dense = dense;
    e.valid_fraction = fraction;
    e.charged = static_cast<std::int64_t>(std::llround(static_cast<double>(dense) * fraction));
    entries.push_back(std::move(e));
}

} // namespace

ContextPyramid encode_context(const Tensor& i0, const Tensor& i1, const MotionEstimate& motion,
                              const NetworkWeights& weights, const EngineConfig& config) {
    if (i0.channels != 3 || !i0.same_shape(i1)) {
        throw std::invalid_argument("encode_context: inputs must be matching 3 x H x W tensors");
    }
    if (i0.height % 16 != 0 || i0.width % 16 != 0) {
        throw std::invalid_argument("encode_context: dims must be divisible by 16");
    }
    (void)config;

    ContextPyramid ctx;
    ctx.input_height = i0.height;
    ctx.input_width = i0.width;

    // appearance encoder, run on both frames with shared weights
    std::array<Tensor, 4> feats0, feats1;
    {
        Tensor x0 = i0, x1 = i1;
        for (int l = 1; l <= 4; ++l) {
            const std::string base = "ws.enc1.l" + std::to_string(l) + ".conv0";
            const ConvSpec spec = weights.conv(base, 2, 1);
            x0 = leaky_relu(conv2d(x0, spec));
            x1 = leaky_relu(conv2d(x1, spec));
            add_entry(ctx.encoder_entries, base + ".i0", spec, x0.height, x0.width, 1.0);
            add_entry(ctx.encoder_entries, base + ".i1", spec, x1.height, x1.width, 1.0);
            feats0[l - 1] = x0;
            feats1[l - 1] = x1;
        }
    }

    // motion/occlusion encoder on the 8-channel motion stack
    std::array<Tensor, 4> motion_feats;
    {
        Tensor x = concat_channels(
            {&motion.flow.to0, &motion.flow.to1, &motion.occlusion, &motion.merged});
        for (int l = 1; l <= 4; ++l) {
            const std::string base = "ws.enc2.l" + std::to_string(l) + ".conv0";
            const ConvSpec spec = weights.conv(base, 2, 1);
            x = leaky_relu(conv2d(x, spec));
            add_entry(ctx.encoder_entries, base, spec, x.height, x.width, 1.0);
            motion_feats[l - 1] = x;
        }
    }

    for (int l = 1; l <= 4; ++l) {
        const float factor = 1.0f / static_cast<float>(1 << l);
        const FlowField level_flow = resize_flow(motion.flow, factor);
        Tensor warped0 = backward_warp(feats0[l - 1], level_flow.to0);
        Tensor warped1 = backward_warp(feats1[l - 1], level_flow.to1);
        ctx.level[l - 1] = concat_channels({&warped0, &warped1, &motion_feats[l - 1]});
    }
    return ctx;
}

SynthesisResult wsnet_reconstruct(const ContextPyramid& ctx, float eta,
                                  const NetworkWeights& weights, const EngineConfig& config,
                                  MaskSource mask_source) {
    if (eta < 0.0f) {
        throw std::invalid_argument("wsnet_reconstruct: eta must be >= 0");
    }
    (void)config;

    SynthesisResult result;
    result.eta_used = eta;
    result.entries = ctx.encoder_entries;
    result.pyramid.levels.resize(4);
    result.pyramid.original_height = ctx.input_height;
    result.pyramid.original_width = ctx.input_width;

    // bottom decoder runs dense and additionally predicts LL^4
    Tensor feat;
    Tensor ll;
    {
        const ConvSpec feat_spec = weights.conv("ws.dec.l4.feat", 1, 1);
        const ConvSpec head_spec = weights.conv("ws.dec.l4.head", 1, 1);
        feat = leaky_relu(conv2d(ctx.level[3], feat_spec));
        Tensor coef = conv2d(feat, head_spec);
        add_entry(result.entries, "ws.dec.l4.feat", feat_spec, feat.height, feat.width, 1.0);
        add_entry(result.entries, "ws.dec.l4.head", head_spec, coef.height, coef.width, 1.0);
        result.pyramid.levels[3] =
            WaveletBand{slice_channels(coef, 0, 3), slice_channels(coef, 3, 3),
                        slice_channels(coef, 6, 3), slice_channels(coef, 9, 3)};
        ll = idwt_haar(result.pyramid.levels[3]);
    }

    for (int l = 3; l >= 1; --l) {
        const WaveletBand& coarser = result.pyramid.levels[l];
        ValidMask mask = (mask_source == MaskSource::kAllValid)
                             ? all_valid(ll.height, ll.width)
                             : compute_valid_mask(coarser, ll, eta);
        const ValidMask dilated = dilate3(mask);

        const std::string base = "ws.dec.l" + std::to_string(l);
        const ConvSpec feat_spec = weights.conv(base + ".feat", 1, 1);
        const ConvSpec head_spec = weights.conv(base + ".head", 1, 1);

        Tensor up_feat = resize_bilinear(feat, 2.0f);
        Tensor x = concat_channels({&ctx.level[l - 1], &up_feat});
        feat = leaky_relu(sparse_conv2d(x, dilated, feat_spec));
        Tensor coef = sparse_conv2d(feat, mask, head_spec);
        add_entry(result.entries, base + ".feat", feat_spec, feat.height, feat.width,
                  dilated.density());
        add_entry(result.entries, base + ".head", head_spec, coef.height, coef.width,
                  mask.density());

        result.pyramid.levels[l - 1] =
            WaveletBand{std::move(ll), slice_channels(coef, 0, 3), slice_channels(coef, 3, 3),
                        slice_channels(coef, 6, 3)};
        result.masks[l - 1] = std::move(mask);
        ll = idwt_haar(result.pyramid.levels[l - 1]);
    }

    result.frame = std::move(ll);
    std::int64_t charged = 0;
    for (const FlopsEntry& e : result.entries) charged += e.charged;
    result.flops = charged;
    return result;
}

SynthesisResult mix_candidates(const std::vector<SynthesisResult>& results,
                               const std::vector<float>& h,
                               const std::vector<float>& candidates) {
    if (results.empty() || results.size() != h.size() || results.size() != candidates.size()) {
        throw std::invalid_argument("mix_candidates: length mismatch");
    }
    const std::size_t heaviest =
        static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());

    SynthesisResult mixed;
    mixed.masks = results[heaviest].masks;
    mixed.entries = results[heaviest].entries;
    mixed.eta_used = candidates[heaviest];
    mixed.pyramid.original_height = results[0].pyramid.original_height;
    mixed.pyramid.original_width = results[0].pyramid.original_width;

    mixed.frame = Tensor(results[0].frame.channels, results[0].frame.height,
                         results[0].frame.width, 0.0f);
    mixed.pyramid.levels.resize(results[0].pyramid.levels.size());
    for (std::size_t l = 0; l < mixed.pyramid.levels.size(); ++l) {
        const WaveletBand& ref = results[0].pyramid.levels[l];
        mixed.pyramid.levels[l] =
            WaveletBand{Tensor(ref.ll.channels, ref.ll.height, ref.ll.width, 0.0f),
                        Tensor(ref.lh.channels, ref.lh.height, ref.lh.width, 0.0f),
                        Tensor(ref.hl.channels, ref.hl.height, ref.hl.width, 0.0f),
                        Tensor(ref.hh.channels, ref.hh.height, ref.hh.width, 0.0f)};
    }

    double flops = 0.0;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const SynthesisResult& r = results[k];
        if (!r.frame.same_shape(mixed.frame)) {
            throw std::invalid_argument("mix_candidates: candidate shapes disagree");
        }
        accumulate_scaled(mixed.frame, r.frame, h[k]);
        for (std::size_t l = 0; l < mixed.pyramid.levels.size(); ++l) {
            accumulate_scaled(mixed.pyramid.levels[l].ll, r.pyramid.levels[l].ll, h[k]);
            accumulate_scaled(mixed.pyramid.levels[l].lh, r.pyramid.levels[l].lh, h[k]);
            accumulate_scaled(mixed.pyramid.levels[l].hl, r.pyramid.levels[l].hl, h[k]);
            accumulate_scaled(mixed.pyramid.levels[l].hh, r.pyramid.levels[l].hh, h[k]);
        }
        flops += static_cast<double>(h[k]) * static_cast<double>(r.flops);
    }
    mixed.flops = static_cast<std::int64_t>(std::llround(flops));
    return mixed;
}

InterpolateResult interpolate(const Tensor& i0, const Tensor& i1, const ThresholdPolicy& policy,
                              const NetworkWeights& weights, const EngineConfig& config,
                              std::uint64_t seed) {
    MotionResult motion = mpnet_forward(i0, i1, weights, config);

    ThresholdPolicy filled = policy;
    if (filled.probabilities.empty()) {
        filled.probabilities = softmax(motion.logits);
    }
    filled = gumbel_sample(filled, seed);

    const ContextPyramid ctx = encode_context(i0, i1, motion.estimate, weights, config);

    InterpolateResult out;
    out.motion = std::move(motion.estimate);

    if (filled.mode == ThresholdPolicy::Mode::kInferArgmax) {
        const int k = filled.argmax_index();
        out.synthesis = wsnet_reconstruct(ctx, filled.candidates[k], weights, config);
        out.candidate_flops = {out.synthesis.flops};
    } else {
        std::vector<SynthesisResult> candidates;
        candidates.reserve(filled.candidates.size());
        for (float eta : filled.candidates) {
            candidates.push_back(wsnet_reconstruct(ctx, eta, weights, config));
        }
        for (const SynthesisResult& r : candidates) {
            out.candidate_flops.push_back(r.flops);
        }
        out.synthesis = mix_candidates(candidates, filled.sample, filled.candidates);
    }
    out.policy = std::move(filled);
    return out;
}

} // namespace wvfi
