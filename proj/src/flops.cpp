#include "waveletvfi/flops.hpp"

#include "waveletvfi/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace wvfi {

void FlopsLedger::add(std::string name, std::int64_t dense, double valid_fraction) {
    if (valid_fraction < 0.0 || valid_fraction > 1.0) {
        throw std::invalid_argument("FlopsLedger: fraction outside [0, 1]");
    }
    FlopsEntry e;
    e.name = std::move(name);
    e.dense = dense;
    e.valid_fraction = valid_fraction;
    e.charged = static_cast<std::int64_t>(std::llround(static_cast<double>(dense) * valid_fraction));
    total += e.charged;
    entries.push_back(std::move(e));
}

void FlopsLedger::append(const std::vector<FlopsEntry>& more) {
    for (const FlopsEntry& e : more) {
        total += e.charged;
        entries.push_back(e);
    }
}

static std::int64_t conv_flops_raw(int in_ch, int out_ch, int kh, int kw, int out_h, int out_w) {
    return 2LL * kh * kw * in_ch * out_ch * static_cast<std::int64_t>(out_h) * out_w;
}

std::int64_t conv_flops(const ConvSpec& spec, int out_h, int out_w, double valid_fraction) {
    if (valid_fraction < 0.0 || valid_fraction > 1.0) {
        throw std::invalid_argument("conv_flops: fraction outside [0, 1]");
    }
    const std::int64_t dense =
        conv_flops_raw(spec.in_channels, spec.out_channels, spec.kh, spec.kw, out_h, out_w);
    return static_cast<std::int64_t>(std::llround(static_cast<double>(dense) * valid_fraction));
}

std::int64_t fc_flops(int in_features, int out_features) {
    return 2LL * in_features * out_features;
}

FlopsLedger ledger_for_synthesis(const SynthesisResult& result, const EngineConfig& config) {
    const int height = result.pyramid.original_height;
    const int width = result.pyramid.original_width;
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("ledger_for_synthesis: result lacks original dims");
    }

    FlopsLedger ledger;
    // motion network, charged dense
    int prev = 3;
    for (int l = 1; l <= 4; ++l) {
        const int w = config.mp_encoder_widths[l - 1];
        const int oh = height >> l, ow = width >> l;
        const std::string base = "mp.enc.l" + std::to_string(l);
        for (const char* img : {".i0", ".i1"}) {
            ledger.add(base + ".conv0" + img, conv_flops_raw(prev, w, 3, 3, oh, ow), 1.0);
            ledger.add(base + ".conv1" + img, conv_flops_raw(w, w, 3, 3, oh, ow), 1.0);
        }
        prev = w;
    }
    for (int l = 4; l >= 1; --l) {
        const int w = config.mp_encoder_widths[l - 1];
        const int in = (l == 4) ? 2 * w : 5 + 2 * w;
        const int oh = height >> l, ow = width >> l;
        const std::string base = "mp.dec.l" + std::to_string(l);
        ledger.add(base + ".conv0", conv_flops_raw(in, w, 3, 3, oh, ow), 1.0);
        ledger.add(base + ".conv1", conv_flops_raw(w, w, 3, 3, oh, ow), 1.0);
        ledger.add(base + ".head", conv_flops_raw(w, 5, 3, 3, oh, ow), 1.0);
    }
    ledger.add("mp.cls.conv",
               conv_flops_raw(config.mp_encoder_widths[3], config.classifier_channels, 3, 3,
                              height >> 4, width >> 4),
               1.0);
    ledger.add("mp.cls.fc0", fc_flops(config.classifier_channels, config.classifier_hidden), 1.0);
    ledger.add("mp.cls.fc1", fc_flops(config.classifier_hidden, config.num_candidates()), 1.0);

    // synthesis network entries recorded while it ran
    ledger.append(result.entries);
    return ledger;
}

} // namespace wvfi
