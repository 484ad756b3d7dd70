#include <doctest.h>

#include "waveletvfi/config.hpp"
#include "waveletvfi/rng.hpp"
#include "waveletvfi/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

using namespace wvfi;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("init_weights is deterministic in the seed") {
    const EngineConfig cfg;
    const NetworkWeights a = init_weights(cfg, 42);
    const NetworkWeights b = init_weights(cfg, 42);
    const NetworkWeights c = init_weights(cfg, 43);
    REQUIRE(a.entries.size() == b.entries.size());
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].data != b.entries[i].data) identical = false;
        if (a.entries[i].data != c.entries[i].data) differs = true;
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("init_weights respects the Xavier bound on unstructured layers") {
    const EngineConfig cfg;
    const NetworkWeights w = init_weights(cfg, 7);
    for (const LayerDef& layer : layer_plan(cfg)) {
        for (float b : w.at(layer.name + ".bias").data) CHECK(b == 0.0f);
        // synthesis encoder 2 and the decoders carry the Haar pass-through
        if (layer.name.rfind("ws.enc2.", 0) == 0 || layer.name.rfind("ws.dec.", 0) == 0) {
            continue;
        }
        const auto& entry = w.at(layer.name + ".weight");
        const float bound =
            std::sqrt(6.0f / static_cast<float>(layer.in_ch * layer.kh * layer.kw +
                                                layer.out_ch * layer.kh * layer.kw));
        for (float v : entry.data) {
            CHECK(std::fabs(v) <= bound);
        }
    }
}

TEST_CASE("motion decoder heads start at zero") {
    const EngineConfig cfg;
    const NetworkWeights w = init_weights(cfg, 7);
    for (int l = 1; l <= 4; ++l) {
        const auto& head = w.at("mp.dec.l" + std::to_string(l) + ".head.weight");
        for (float v : head.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("untrained synthesis net predicts the merged frame's wavelet bands") {
    // the Haar pass-through makes the untrained pipeline's coefficients track
    // the merged frame: exactly zero-flow motion head means merged is the
    // frame average, whose DWT the predicted pyramid should approximate
    EngineConfig cfg;
    cfg.ws_encoder_widths = {22, 24, 28, 32};
    cfg.ws_decoder_widths = {24, 26, 30, 34};
    cfg.mp_encoder_widths = {8, 12, 16, 20};
    cfg.classifier_channels = 6;
    cfg.classifier_hidden = 6;
    cfg.head_init_noise = 0.0f; // isolate the structural part
    const NetworkWeights w = init_weights(cfg, 5);

    Tensor i0(3, 32, 32, 0.0f), i1(3, 32, 32, 0.0f);
    SplitMix64 rng(9);
    for (float& v : i0.data) v = rng.uniform_float(0.0f, 1.0f);
    for (float& v : i1.data) v = rng.uniform_float(0.0f, 1.0f);

    const MotionResult motion = mpnet_forward(i0, i1, w, cfg);
    const ContextPyramid ctx = encode_context(i0, i1, motion.estimate, w, cfg);
    const SynthesisResult r =
        wsnet_reconstruct(ctx, 0.0f, w, cfg, MaskSource::kAllValid);

    const WaveletPyramid expected = decompose(motion.estimate.merged, 4);
    for (int l = 0; l < 4; ++l) {
        double max_err = 0.0;
        const Tensor* pred[3] = {&r.pyramid.levels[l].lh, &r.pyramid.levels[l].hl,
                                 &r.pyramid.levels[l].hh};
        const Tensor* want[3] = {&expected.levels[l].lh, &expected.levels[l].hl,
                                 &expected.levels[l].hh};
        for (int b = 0; b < 3; ++b) {
            for (std::size_t i = 0; i < pred[b]->size(); ++i) {
                max_err = std::max(max_err, std::fabs(static_cast<double>(pred[b]->data[i]) -
                                                      want[b]->data[i]));
            }
        }
        CHECK(max_err < 1e-4);
    }
    // and the reconstructed frame is the merged frame itself
    double frame_err = 0.0;
    for (std::size_t i = 0; i < r.frame.size(); ++i) {
        frame_err = std::max(frame_err, std::fabs(static_cast<double>(r.frame.data[i]) -
                                                  motion.estimate.merged.data[i]));
    }
    CHECK(frame_err < 1e-4);
}

TEST_CASE("weight files round-trip bit-exactly") {
    const EngineConfig cfg;
    const NetworkWeights w = init_weights(cfg, 99);
    const std::string path = temp_path("wvfi_roundtrip.wvfi");
    save_weights(w, path);
    const NetworkWeights r = load_weights(path);
    REQUIRE(r.entries.size() == w.entries.size());
    for (std::size_t i = 0; i < w.entries.size(); ++i) {
        CHECK(r.entries[i].name == w.entries[i].name);
        CHECK(r.entries[i].dims == w.entries[i].dims);
        CHECK(r.entries[i].data == w.entries[i].data);
    }
    r.validate_against(cfg);
    std::remove(path.c_str());
}

TEST_CASE("corrupted magic is rejected with an offset") {
    const EngineConfig cfg;
    const std::string path = temp_path("wvfi_badmagic.wvfi");
    save_weights(init_weights(cfg, 1), path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_WITH_AS(load_weights(path), doctest::Contains("offset 0"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("truncated files are rejected") {
    const EngineConfig cfg;
    const std::string path = temp_path("wvfi_trunc.wvfi");
    save_weights(init_weights(cfg, 1), path);
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_weights(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("validate_against catches missing and misshapen layers") {
    const EngineConfig cfg;
    NetworkWeights w = init_weights(cfg, 3);
    w.entries[w.index.at("mp.enc.l1.conv0.weight")].dims[0] += 1;
    CHECK_THROWS_AS(w.validate_against(cfg), std::runtime_error);

    NetworkWeights empty;
    CHECK_THROWS_AS(empty.validate_against(cfg), std::runtime_error);
}

TEST_CASE("config validation") {
    EngineConfig cfg;
    cfg.eta_candidates = {0.0f, 0.005f, 0.005f};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.eta_candidates = {0.0f, -0.005f};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EngineConfig{};
    cfg.temperature = 0.0f;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EngineConfig{};
    CHECK_NOTHROW(cfg.validate());
}
