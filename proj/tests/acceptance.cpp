// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria run against seeded weights and synthetic inputs only.
#include "waveletvfi/losses.hpp"
#include "waveletvfi/pipeline.hpp"
#include "waveletvfi/rng.hpp"
#include "waveletvfi/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace wvfi;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(SplitMix64& rng, int c, int h, int w, float lo = 0.0f, float hi = 1.0f) {
    Tensor t(c, h, w);
    for (float& v : t.data) v = rng.uniform_float(lo, hi);
    return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(static_cast<double>(a.data[i]) - b.data[i]));
    }
    return m;
}

// --- criterion 1: wavelet round trip ----------------------------------------

void criterion_round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    SplitMix64 rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Tensor img = random_tensor(rng, 3, 64, 64);
        worst = std::max(worst, max_abs_diff(reconstruct(decompose(img, 4)), img));
    }
    const double elapsed = seconds_since(t0);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max err %.3g over 100 images, %.2fs", worst, elapsed);
    report(1, worst < 1e-6 && elapsed < 10.0, "wavelet round-trip < 1e-6 within 10s", detail);
}

// --- criterion 2: sparse/dense equivalence ----------------------------------

void criterion_sparse_equivalence() {
    SplitMix64 rng(1002);
    bool exact = true;
    for (int i = 0; i < 100 && exact; ++i) {
        const int in_ch = 1 + static_cast<int>(rng.next() % 6);
        const int out_ch = 1 + static_cast<int>(rng.next() % 6);
        const int h = 8 + static_cast<int>(rng.next() % 18);
        const int w = 8 + static_cast<int>(rng.next() % 18);
        const Tensor x = random_tensor(rng, in_ch, h, w, -1.0f, 1.0f);
        ConvSpec spec;
        spec.in_channels = in_ch;
        spec.out_channels = out_ch;
        spec.kh = spec.kw = 3;
        spec.stride = 1;
        spec.padding = 1;
        spec.weights.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
        spec.bias.resize(out_ch);
        for (float& v : spec.weights) v = rng.uniform_float(-1.0f, 1.0f);
        for (float& v : spec.bias) v = rng.uniform_float(-0.3f, 0.3f);
        ValidMask mask(h, w);
        for (std::uint8_t& b : mask.bits) b = static_cast<std::uint8_t>(rng.next() & 1);

        const Tensor dense = conv2d(x, spec);
        const Tensor sparse = sparse_conv2d(x, mask, spec);
        for (int c = 0; c < out_ch && exact; ++c) {
            for (int y = 0; y < h && exact; ++y) {
                for (int xx = 0; xx < w; ++xx) {
                    const float want = mask.at(y, xx) ? dense.at(c, y, xx) : 0.0f;
                    if (sparse.at(c, y, xx) != want) {
                        exact = false;
                        break;
                    }
                }
            }
        }
    }

    double cascade_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Tensor x = random_tensor(rng, 4, 18, 18, -1.0f, 1.0f);
        ConvSpec c1, c2;
        c1.in_channels = 4;
        c1.out_channels = 6;
        c2.in_channels = 6;
        c2.out_channels = 3;
        for (ConvSpec* s : {&c1, &c2}) {
            s->kh = s->kw = 3;
            s->stride = 1;
            s->padding = 1;
            s->weights.resize(static_cast<std::size_t>(s->out_channels) * s->in_channels * 9);
            s->bias.resize(s->out_channels);
            for (float& v : s->weights) v = rng.uniform_float(-1.0f, 1.0f);
            for (float& v : s->bias) v = rng.uniform_float(-0.3f, 0.3f);
        }
        ValidMask mask(18, 18);
        for (std::uint8_t& b : mask.bits) b = static_cast<std::uint8_t>(rng.next() % 4 == 0);

        const Tensor dense = conv2d(conv2d(x, c1), c2);
        const Tensor sparse = sparse_conv2d(sparse_conv2d(x, dilate3(mask), c1), mask, c2);
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < 18; ++y) {
                for (int xx = 0; xx < 18; ++xx) {
                    if (mask.at(y, xx)) {
                        cascade_worst =
                            std::max(cascade_worst,
                                     std::fabs(static_cast<double>(sparse.at(c, y, xx)) -
                                               dense.at(c, y, xx)));
                    }
                }
            }
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "100 triples exact=%d, cascade max err %.3g", int(exact),
                  cascade_worst);
    report(2, exact && cascade_worst <= 1e-6, "sparse conv == mask * dense; cascade exact",
           detail);
}

// --- criteria 3 and 4: eta sweeps -------------------------------------------

const std::vector<float> kEtaGrid{0.0f, 0.0025f, 0.005f, 0.0075f, 0.01f, 0.0125f, 0.015f};

void criterion_monotonicity() {
    const auto t0 = std::chrono::steady_clock::now();
    const EngineConfig cfg;
    int violations = 0;
    for (int run = 0; run < 20; ++run) {
        const NetworkWeights weights = init_weights(cfg, 3000 + run);
        const Triplet t = (run % 2 == 0) ? make_piecewise_triplet(run, 128, 128)
                                         : make_noise_triplet(run, 128, 128);
        const MotionResult motion = mpnet_forward(t.frame0, t.frame1, weights, cfg);
        const ContextPyramid ctx =
            encode_context(t.frame0, t.frame1, motion.estimate, weights, cfg);
        double prev_density[3] = {2.0, 2.0, 2.0};
        std::int64_t prev_total = -1;
        for (float eta : kEtaGrid) {
            const SynthesisResult r = wsnet_reconstruct(ctx, eta, weights, cfg);
            const FlopsLedger ledger = ledger_for_synthesis(r, cfg);
            for (int l = 0; l < 3; ++l) {
                if (r.masks[l].density() > prev_density[l] + 1e-12) ++violations;
                prev_density[l] = r.masks[l].density();
            }
            if (prev_total >= 0 && ledger.total > prev_total) ++violations;
            prev_total = ledger.total;
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d violations over 20 runs x 7 etas, %.1fs",
                  violations, seconds_since(t0));
    report(3, violations == 0, "mask density and ledger FLOPs non-increasing in eta", detail);
}

void criterion_compute_reduction() {
    const EngineConfig cfg;
    auto reduction_for = [&](const Triplet& t, std::uint64_t weight_seed) {
        const NetworkWeights weights = init_weights(cfg, weight_seed);
        const MotionResult motion = mpnet_forward(t.frame0, t.frame1, weights, cfg);
        const ContextPyramid ctx =
            encode_context(t.frame0, t.frame1, motion.estimate, weights, cfg);
        const std::int64_t base =
            ledger_for_synthesis(wsnet_reconstruct(ctx, 0.0f, weights, cfg), cfg).total;
        const std::int64_t tight =
            ledger_for_synthesis(wsnet_reconstruct(ctx, 0.015f, weights, cfg), cfg).total;
        return 1.0 - static_cast<double>(tight) / static_cast<double>(base);
    };

    bool ok = true;
    double flat_sum = 0.0, noise_sum = 0.0;
    const int runs = 5;
    for (int i = 0; i < runs; ++i) {
        const double flat = reduction_for(make_piecewise_triplet(500 + i, 128, 128), 4000 + i);
        flat_sum += flat;
        if (flat < 0.20) ok = false;
        noise_sum += reduction_for(make_noise_triplet(600 + i, 128, 128), 4000 + i);
    }
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "piecewise mean reduction %.1f%% (each run must exceed 20%%), dense-noise mean "
                  "%.1f%% (recorded)",
                  100.0 * flat_sum / runs, 100.0 * noise_sum / runs);
    report(4, ok, "eta=0.015 cuts >= 20% FLOPs on piecewise-constant content", detail);
}

// --- criterion 5: gumbel sampling ---------------------------------------------

void criterion_gumbel() {
    const auto t0 = std::chrono::steady_clock::now();
    bool simplex_ok = true;

    ThresholdPolicy sharp;
    sharp.probabilities = {0.97f, 0.01f, 0.01f, 0.01f};
    sharp.temperature = 0.01f;
    sharp.mode = ThresholdPolicy::Mode::kTrainSoft;
    int concentrated = 0;
    for (int seed = 0; seed < 10000; ++seed) {
        const ThresholdPolicy out = gumbel_sample(sharp, static_cast<std::uint64_t>(seed));
        double sum = 0.0;
        float mx = 0.0f;
        for (float h : out.sample) {
            if (h < 0.0f) simplex_ok = false;
            sum += h;
            mx = std::max(mx, h);
        }
        if (std::fabs(sum - 1.0) > 1e-5) simplex_ok = false;
        if (mx > 0.99f) ++concentrated;
    }

    ThresholdPolicy uniform;
    uniform.probabilities = {0.25f, 0.25f, 0.25f, 0.25f};
    uniform.temperature = 1.0f;
    uniform.mode = ThresholdPolicy::Mode::kTrainSoft;
    int counts[4] = {0, 0, 0, 0};
    for (int seed = 0; seed < 100000; ++seed) {
        const ThresholdPolicy out = gumbel_sample(uniform, static_cast<std::uint64_t>(seed));
        double sum = 0.0;
        for (float h : out.sample) sum += h;
        if (std::fabs(sum - 1.0) > 1e-5) simplex_ok = false;
        counts[std::max_element(out.sample.begin(), out.sample.end()) - out.sample.begin()]++;
    }
    bool freq_ok = true;
    for (int k = 0; k < 4; ++k) {
        if (std::fabs(counts[k] / 1e5 - 0.25) > 0.01) freq_ok = false;
    }

    const double elapsed = seconds_since(t0);
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "tau=0.01 concentrated %.2f%% (need >= 99%%); uniform freqs %.3f/%.3f/%.3f/%.3f;"
                  " simplex ok=%d; %.1fs",
                  concentrated / 100.0, counts[0] / 1e5, counts[1] / 1e5, counts[2] / 1e5,
                  counts[3] / 1e5, int(simplex_ok), elapsed);
    report(5, concentrated >= 9900 && freq_ok && simplex_ok && elapsed < 30.0,
           "gumbel-softmax concentration, frequencies and simplex", detail);
}

// --- criterion 6: gradient checks ---------------------------------------------

template <typename LossFn>
double fd_relative_error(Tensor& pred, const Tensor& analytic, LossFn&& fn) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const float orig = pred.data[i];
        const float xp = orig + 1e-4f;
        const float xm = orig - 1e-4f;
        pred.data[i] = xp;
        const double lp = fn();
        pred.data[i] = xm;
        const double lm = fn();
        pred.data[i] = orig;
        const double fd = (lp - lm) / (static_cast<double>(xp) - static_cast<double>(xm));
        const double d = static_cast<double>(analytic.data[i]) - fd;
        num += d * d;
        den += fd * fd;
    }
    return std::sqrt(num / std::max(den, 1e-30));
}

// random pair whose differences stay off the Charbonnier cusp, where the
// finite-difference oracle itself is inaccurate at step 1e-4
Tensor offset_from(const Tensor& gt, SplitMix64& rng) {
    Tensor pred = gt;
    for (float& v : pred.data) {
        const float mag = rng.uniform_float(0.01f, 0.4f);
        v += (rng.next() & 1) ? mag : -mag;
    }
    return pred;
}

void criterion_gradients() {
    SplitMix64 rng(1006);
    double worst_charb = 0.0, worst_freq = 0.0, worst_census = 0.0;

    for (int i = 0; i < 20; ++i) {
        const Tensor gt = random_tensor(rng, 3, 5, 6);
        Tensor pred = offset_from(gt, rng);
        const LossResult res = charbonnier(pred, gt);
        worst_charb = std::max(worst_charb, fd_relative_error(pred, res.grad, [&] {
                                   return charbonnier(pred, gt).loss;
                               }));
    }

    for (int i = 0; i < 20; ++i) {
        const Tensor gt_img = random_tensor(rng, 1, 8, 8);
        const WaveletPyramid gt = decompose(gt_img, 2);
        // offset the coefficients themselves: rho acts on coefficient
        // differences, so those are what must stay off the cusp
        WaveletPyramid pred = gt;
        for (WaveletBand& band : pred.levels) {
            for (Tensor* b : {&band.ll, &band.lh, &band.hl, &band.hh}) {
                for (float& v : b->data) {
                    const float mag = rng.uniform_float(0.01f, 0.4f);
                    v += (rng.next() & 1) ? mag : -mag;
                }
            }
        }
        const PyramidLossResult res = frequency_loss(pred, gt);
        for (int l = 0; l < 2; ++l) {
            Tensor* bands[4] = {&pred.levels[l].ll, &pred.levels[l].lh, &pred.levels[l].hl,
                                &pred.levels[l].hh};
            const Tensor* grads[4] = {&res.grad.levels[l].ll, &res.grad.levels[l].lh,
                                      &res.grad.levels[l].hl, &res.grad.levels[l].hh};
            for (int b = 0; b < 4; ++b) {
                worst_freq = std::max(worst_freq, fd_relative_error(*bands[b], *grads[b], [&] {
                                          return frequency_loss(pred, gt).loss;
                                      }));
            }
        }
    }

    for (int i = 0; i < 20; ++i) {
        const Tensor gt = random_tensor(rng, 3, 10, 10);
        Tensor pred = random_tensor(rng, 3, 10, 10);
        const LossResult res = census_loss(pred, gt);
        worst_census = std::max(worst_census, fd_relative_error(pred, res.grad, [&] {
                                    return census_loss(pred, gt).loss;
                                }));
    }

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "rel err: charbonnier %.2e (<=1e-4), frequency %.2e (<=1e-4), census %.2e "
                  "(<=1e-3)",
                  worst_charb, worst_freq, worst_census);
    report(6, worst_charb <= 1e-4 && worst_freq <= 1e-4 && worst_census <= 1e-3,
           "loss gradients match central finite differences", detail);
}

// --- criterion 7: end-to-end contract -----------------------------------------

void criterion_end_to_end() {
    EngineConfig cfg;
    cfg.fixed_eta = 0.005f;
    const NetworkWeights weights = init_weights(cfg, 7000);
    bool ok = true;
    std::string detail;
    const int sizes[4][2] = {{48, 48}, {64, 64}, {128, 128}, {50, 70}};
    for (const auto& hw : sizes) {
        const Triplet t = make_piecewise_triplet(hw[0] * 1000 + hw[1], hw[0], hw[1]);
        const PipelineRun a = run_pipeline(t.frame0, t.frame1, cfg, weights, 11);
        const PipelineRun b = run_pipeline(t.frame0, t.frame1, cfg, weights, 11);
        const bool shape_ok = a.frame.channels == 3 && a.frame.height == hw[0] &&
                              a.frame.width == hw[1] && all_finite(a.frame);
        const double consistency = max_abs_diff(reconstruct(a.synthesis.pyramid),
                                                a.synthesis.frame);
        const bool deterministic = tensor_hash(a.frame) == tensor_hash(b.frame);
        if (!shape_ok || consistency > 1e-6 || !deterministic) ok = false;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "[%dx%d shape=%d cons=%.2g det=%d] ", hw[0], hw[1],
                      int(shape_ok), consistency, int(deterministic));
        detail += buf;
    }
    // dynamic threshold selection obeys the same contract
    EngineConfig dyn = cfg;
    dyn.mode = ThresholdMode::kDynamic;
    const Triplet t = make_piecewise_triplet(42, 64, 64);
    const PipelineRun d1 = run_pipeline(t.frame0, t.frame1, dyn, weights, 13);
    const PipelineRun d2 = run_pipeline(t.frame0, t.frame1, dyn, weights, 13);
    if (!(all_finite(d1.frame) && tensor_hash(d1.frame) == tensor_hash(d2.frame))) ok = false;
    report(7, ok, "interpolate returns finite consistent frames, bit-stable across runs", detail);
}

// --- criterion 8: zero-head sanity ----------------------------------------------

void criterion_zero_head() {
    const EngineConfig cfg;
    NetworkWeights weights = init_weights(cfg, 8000);
    for (int l = 1; l <= 4; ++l) {
        const std::string base = "mp.dec.l" + std::to_string(l) + ".head";
        auto& w = weights.entries[weights.index.at(base + ".weight")];
        auto& b = weights.entries[weights.index.at(base + ".bias")];
        std::fill(w.data.begin(), w.data.end(), 0.0f);
        std::fill(b.data.begin(), b.data.end(), 0.0f);
    }
    const Triplet t = make_piecewise_triplet(88, 64, 64);
    const MotionResult res = mpnet_forward(t.frame0, t.frame1, weights, cfg);

    bool flow_zero = true, occ_half = true, merged_mean = true;
    for (float v : res.estimate.flow.to0.data) flow_zero &= (v == 0.0f);
    for (float v : res.estimate.flow.to1.data) flow_zero &= (v == 0.0f);
    for (float v : res.estimate.occlusion.data) occ_half &= (v == 0.5f);
    const Tensor mean = scale(add(t.frame0, t.frame1), 0.5f);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        merged_mean &= (res.estimate.merged.data[i] == mean.data[i]);
    }

    // independent PSNR oracle: plain double-precision loop over the fixture
    double mse = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double d = static_cast<double>(mean.data[i]) - static_cast<double>(t.gt.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(mean.size());
    const double psnr_by_hand = (mse < 1e-10) ? 100.0 : 10.0 * std::log10(1.0 / mse);
    const double psnr_gap = std::fabs(psnr_by_hand - psnr(mean, t.gt));

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "flow==0:%d occ==0.5:%d merged==mean:%d psnr gap %.2e dB", int(flow_zero),
                  int(occ_half), int(merged_mean), psnr_gap);
    report(8, flow_zero && occ_half && merged_mean && psnr_gap <= 1e-6,
           "zeroed heads give the exact frame average and matching PSNR", detail);
}

// --- criterion 9: cost/total-loss arithmetic ------------------------------------

void criterion_loss_arithmetic() {
    bool ok = true;

    const std::vector<std::int64_t> flops{100, 200, 300, 400};
    for (int k = 0; k < 4; ++k) {
        std::vector<float> onehot(4, 0.0f);
        onehot[k] = 1.0f;
        const double want = static_cast<double>(flops[k]) / 20.0;
        if (std::fabs(cost_regularization(onehot, flops, 4, 5) - want) > 1e-9) ok = false;
    }
    if (std::fabs(cost_regularization({0.5f, 0.5f}, {100, 200}, 2, 5) - 15.0) > 1e-9) ok = false;

    LossWeights w;
    w.alpha = 0.01;
    w.beta = 1.0;
    if (std::fabs(total_loss(1.0, 2.0, 3.0, w) - 4.02) > 1e-9) ok = false;
    w.alpha = 0.0;
    w.beta = 0.0;
    if (std::fabs(total_loss(0.625, 99.0, 99.0, w) - 0.625) > 1e-9) ok = false;

    report(9, ok, "cost regularization and total loss reproduce hand-computed values",
           ok ? "all exact to 1e-9" : "mismatch");
}

} // namespace

int main() {
    criterion_round_trip();
    criterion_sparse_equivalence();
    criterion_monotonicity();
    criterion_compute_reduction();
    criterion_gumbel();
    criterion_gradients();
    criterion_end_to_end();
    criterion_zero_head();
    criterion_loss_arithmetic();

    if (g_failures == 0) {
        std::printf("acceptance: all 9 criteria pass\n");
    } else {
        std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
