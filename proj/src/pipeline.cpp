#include "waveletvfi/pipeline.hpp"

#include "waveletvfi/image_io.hpp"
#include "waveletvfi/kernels.hpp"
#include "waveletvfi/losses.hpp"
#include "waveletvfi/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

namespace wvfi {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Tensor pad_reflect_to16(const Tensor& image, int& pad_bottom, int& pad_right) {
    const int target_h = (image.height + 15) / 16 * 16;
    const int target_w = (image.width + 15) / 16 * 16;
    pad_bottom = target_h - image.height;
    pad_right = target_w - image.width;
    if (pad_bottom == 0 && pad_right == 0) return image;
    if (pad_bottom >= image.height || pad_right >= image.width) {
        throw std::invalid_argument("pad_reflect_to16: image too small to pad");
    }
    Tensor out(image.channels, target_h, target_w);
    for (int c = 0; c < image.channels; ++c) {
        for (int y = 0; y < target_h; ++y) {
            const int sy = (y < image.height) ? y : 2 * image.height - 1 - y;
            for (int x = 0; x < target_w; ++x) {
                const int sx = (x < image.width) ? x : 2 * image.width - 1 - x;
                out.at(c, y, x) = image.at(c, sy, sx);
            }
        }
    }
    return out;
}

Tensor crop_top_left(const Tensor& image, int height, int width) {
    if (height > image.height || width > image.width) {
        throw std::invalid_argument("crop_top_left: crop larger than image");
    }
    if (height == image.height && width == image.width) return image;
    Tensor out(image.channels, height, width);
    for (int c = 0; c < image.channels; ++c) {
        for (int y = 0; y < height; ++y) {
            const float* src = image.plane(c) + static_cast<std::size_t>(y) * image.width;
            std::copy(src, src + width, out.plane(c) + static_cast<std::size_t>(y) * width);
        }
    }
    return out;
}

PipelineRun run_pipeline(const Tensor& i0, const Tensor& i1, const EngineConfig& config,
                         const NetworkWeights& weights, std::uint64_t seed) {
    if (!i0.same_shape(i1)) {
        throw std::invalid_argument("run_pipeline: frames disagree on shape");
    }
    config.validate();

    PipelineRun run;
    const Tensor p0 = pad_reflect_to16(i0, run.pad_bottom, run.pad_right);
    int pb = 0, pr = 0;
    const Tensor p1 = pad_reflect_to16(i1, pb, pr);

    if (config.mode == ThresholdMode::kDynamic) {
        ThresholdPolicy policy;
        policy.candidates = config.eta_candidates;
        policy.temperature = config.temperature;
        policy.mode = ThresholdPolicy::Mode::kInferArgmax;
        InterpolateResult result = interpolate(p0, p1, policy, weights, config, seed);
        run.synthesis = std::move(result.synthesis);
        run.motion = std::move(result.motion);
        run.policy = std::move(result.policy);
        run.candidate_flops = std::move(result.candidate_flops);
    } else {
        MotionResult motion = mpnet_forward(p0, p1, weights, config);
        const ContextPyramid ctx = encode_context(p0, p1, motion.estimate, weights, config);
        run.synthesis = wsnet_reconstruct(ctx, config.fixed_eta, weights, config);
        run.motion = std::move(motion.estimate);
        run.policy.candidates = config.eta_candidates;
        run.policy.temperature = config.temperature;
        run.policy.probabilities = softmax(motion.logits);
        run.candidate_flops = {run.synthesis.flops};
    }
    run.frame = crop_top_left(run.synthesis.frame, i0.height, i0.width);
    return run;
}

namespace {

ordered_json ledger_json(const FlopsLedger& ledger) {
    ordered_json rows = ordered_json::array();
    for (const FlopsEntry& e : ledger.entries) {
        ordered_json row;
        row["name"] = e.name;
        row["dense"] = e.dense;
        row["valid_fraction"] = e.valid_fraction;
        row["charged"] = e.charged;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::string interpolate_report_json(const PipelineRun& run, const EngineConfig& config,
                                    int input_height, int input_width, std::uint64_t seed) {
    const FlopsLedger ledger = ledger_for_synthesis(run.synthesis, config);
    std::int64_t dense_total = 0;
    for (const FlopsEntry& e : ledger.entries) dense_total += e.dense;

    ordered_json j;
    j["mode"] = (config.mode == ThresholdMode::kDynamic) ? "dynamic" : "fixed";
    j["eta_used"] = run.synthesis.eta_used;
    j["candidates"] = config.eta_candidates;
    j["classifier_probabilities"] = run.policy.probabilities;
    j["seed"] = seed;
    j["kernel_backend"] = kernels::backend_name(kernels::active_backend());
    ordered_json input;
    input["height"] = input_height;
    input["width"] = input_width;
    input["padded_height"] = input_height + run.pad_bottom;
    input["padded_width"] = input_width + run.pad_right;
    j["input"] = std::move(input);
    ordered_json densities;
    for (int l = 1; l <= 3; ++l) {
        densities["level" + std::to_string(l)] = run.synthesis.masks[l - 1].density();
    }
    j["mask_densities"] = std::move(densities);
    ordered_json flops;
    flops["synthesis_charged"] = run.synthesis.flops;
    flops["ledger_total"] = ledger.total;
    flops["ledger_dense_total"] = dense_total;
    j["flops"] = std::move(flops);
    j["frame_hash"] = tensor_hash(run.frame);
    j["ledger"] = ledger_json(ledger);
    return j.dump(2) + "\n";
}

namespace {

Tensor clamp01(const Tensor& t) {
    Tensor out = t;
    for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

std::string find_frame(const fs::path& dir, const char* stem) {
    for (const char* ext : {".png", ".ppm"}) {
        fs::path p = dir / (std::string(stem) + ext);
        if (fs::exists(p)) return p.string();
    }
    throw std::runtime_error("bench: missing " + std::string(stem) + " in " + dir.string());
}

} // namespace

BenchReport run_bench(const std::string& dir, const std::vector<float>& etas,
                      const EngineConfig& config, const NetworkWeights& weights) {
    if (etas.empty()) {
        throw std::invalid_argument("bench: no eta values");
    }
    std::vector<fs::path> triplet_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) triplet_dirs.push_back(entry.path());
    }
    std::sort(triplet_dirs.begin(), triplet_dirs.end());
    if (triplet_dirs.empty()) {
        throw std::runtime_error("bench: no triplet directories under '" + dir + "'");
    }

    BenchReport report;
    report.etas = etas;
    for (const fs::path& tdir : triplet_dirs) {
        const Tensor f0 = load_image(find_frame(tdir, "frame0"));
        const Tensor f1 = load_image(find_frame(tdir, "frame1"));
        const Tensor gt = load_image(find_frame(tdir, "gt"));
        if (!f0.same_shape(f1) || !f0.same_shape(gt)) {
            throw std::runtime_error("bench: triplet shapes disagree in " + tdir.string());
        }

        int pb = 0, pr = 0;
        const Tensor p0 = pad_reflect_to16(f0, pb, pr);
        const Tensor p1 = pad_reflect_to16(f1, pb, pr);
        const MotionResult motion = mpnet_forward(p0, p1, weights, config);
        const ContextPyramid ctx = encode_context(p0, p1, motion.estimate, weights, config);

        BenchTriplet row;
        row.name = tdir.filename().string();
        for (float eta : etas) {
            const SynthesisResult synth = wsnet_reconstruct(ctx, eta, weights, config);
            const Tensor frame = clamp01(crop_top_left(synth.frame, f0.height, f0.width));
            const FlopsLedger ledger = ledger_for_synthesis(synth, config);
            BenchRow r;
            r.eta = eta;
            r.psnr = psnr(frame, gt);
            r.ssim = ssim(frame, gt);
            r.flops_total = ledger.total;
            for (int l = 0; l < 3; ++l) r.mask_density[l] = synth.masks[l].density();
            row.rows.push_back(r);
        }
        report.triplets.push_back(std::move(row));
    }

    for (std::size_t e = 0; e < etas.size(); ++e) {
        BenchRow agg;
        agg.eta = etas[e];
        double flops = 0.0;
        for (const BenchTriplet& t : report.triplets) {
            agg.psnr += t.rows[e].psnr;
            agg.ssim += t.rows[e].ssim;
            flops += static_cast<double>(t.rows[e].flops_total);
            for (int l = 0; l < 3; ++l) agg.mask_density[l] += t.rows[e].mask_density[l];
        }
        const double n = static_cast<double>(report.triplets.size());
        agg.psnr /= n;
        agg.ssim /= n;
        agg.flops_total = static_cast<std::int64_t>(std::llround(flops / n));
        for (int l = 0; l < 3; ++l) agg.mask_density[l] /= n;
        report.aggregate.push_back(agg);
    }
    return report;
}

namespace {

ordered_json bench_row_json(const BenchRow& r) {
    ordered_json row;
    row["eta"] = r.eta;
    row["psnr"] = r.psnr;
    row["ssim"] = r.ssim;
    row["flops_total"] = r.flops_total;
    row["mask_densities"] = {r.mask_density[0], r.mask_density[1], r.mask_density[2]};
    return row;
}

} // namespace

std::string bench_report_json(const BenchReport& report) {
    ordered_json j;
    j["etas"] = report.etas;
    ordered_json triplets = ordered_json::array();
    for (const BenchTriplet& t : report.triplets) {
        ordered_json tj;
        tj["name"] = t.name;
        ordered_json rows = ordered_json::array();
        for (const BenchRow& r : t.rows) rows.push_back(bench_row_json(r));
        tj["rows"] = std::move(rows);
        triplets.push_back(std::move(tj));
    }
    j["triplets"] = std::move(triplets);
    ordered_json agg = ordered_json::array();
    for (const BenchRow& r : report.aggregate) agg.push_back(bench_row_json(r));
    j["aggregate"] = std::move(agg);
    return j.dump(2) + "\n";
}

Triplet make_piecewise_triplet(std::uint64_t seed, int height, int width) {
    SplitMix64 rng(seed);
    Triplet t{Tensor(3, height, width), Tensor(3, height, width), Tensor(3, height, width)};

    auto fill_bg = [&](Tensor& img, const float* color) {
        for (int c = 0; c < 3; ++c) {
            std::fill(img.plane(c), img.plane(c) + img.plane_size(), color[c]);
        }
    };
    float bg[3];
    for (float& v : bg) v = rng.uniform_float(0.15f, 0.45f);
    fill_bg(t.frame0, bg);
    fill_bg(t.frame1, bg);
    fill_bg(t.gt, bg);

    auto draw_rect = [&](Tensor& img, int y0, int x0, int rh, int rw, const float* color) {
        const int y1 = std::min(height, y0 + rh), x1 = std::min(width, x0 + rw);
        for (int c = 0; c < 3; ++c) {
            for (int y = std::max(0, y0); y < y1; ++y) {
                float* row = img.plane(c) + static_cast<std::size_t>(y) * width;
                for (int x = std::max(0, x0); x < x1; ++x) row[x] = color[c];
            }
        }
    };

    const int rects = 4;
    for (int r = 0; r < rects; ++r) {
        float color[3];
        for (float& v : color) v = rng.uniform_float(0.5f, 0.95f);
        const int rh = height / 5 + static_cast<int>(rng.next() % (height / 4));
        const int rw = width / 5 + static_cast<int>(rng.next() % (width / 4));
        const int y0 = static_cast<int>(rng.next() % (height - rh));
        const int x0 = static_cast<int>(rng.next() % (width - rw));
        // even displacement so the midpoint stays on the pixel grid
        const int dy = 2 * (static_cast<int>(rng.next() % 5) - 2);
        const int dx = 2 * (static_cast<int>(rng.next() % 5) - 2);
        draw_rect(t.frame0, y0, x0, rh, rw, color);
        draw_rect(t.gt, y0 + dy / 2, x0 + dx / 2, rh, rw, color);
        draw_rect(t.frame1, y0 + dy, x0 + dx, rh, rw, color);
    }
    return t;
}

Triplet make_noise_triplet(std::uint64_t seed, int height, int width) {
    SplitMix64 rng(seed);
    Triplet t{Tensor(3, height, width), Tensor(3, height, width), Tensor(3, height, width)};
    for (Tensor* img : {&t.frame0, &t.gt, &t.frame1}) {
        for (float& v : img->data) v = rng.uniform_float(0.0f, 1.0f);
    }
    return t;
}

std::uint64_t tensor_hash(const Tensor& t) {
    std::uint64_t h = 1469598103934665603ULL; // FNV offset basis
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const std::int32_t dims[3] = {t.channels, t.height, t.width};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(t.data.data(), t.data.size() * sizeof(float));
    return h;
}

namespace {

Tensor random_tensor(SplitMix64& rng, int c, int h, int w, float lo = 0.0f, float hi = 1.0f) {
    Tensor t(c, h, w);
    for (float& v : t.data) v = rng.uniform_float(lo, hi);
    return t;
}

ConvSpec random_conv(SplitMix64& rng, int in, int out, int k, int stride, int pad) {
    ConvSpec spec;
    spec.in_channels = in;
    spec.out_channels = out;
    spec.kh = spec.kw = k;
    spec.stride = stride;
    spec.padding = pad;
    spec.weights.resize(static_cast<std::size_t>(out) * in * k * k);
    spec.bias.resize(out);
    for (float& v : spec.weights) v = rng.uniform_float(-0.5f, 0.5f);
    for (float& v : spec.bias) v = rng.uniform_float(-0.1f, 0.1f);
    return spec;
}

// Central finite differences against the analytic gradient; returns the
// relative L2 error. Steps use the actually-representable float deltas.
template <typename LossFn>
double gradient_check(Tensor& pred, const Tensor& gt, const Tensor& analytic, LossFn&& fn) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const float orig = pred.data[i];
        const float xp = orig + 1e-4f;
        const float xm = orig - 1e-4f;
        pred.data[i] = xp;
        const double lp = fn(pred, gt);
        pred.data[i] = xm;
        const double lm = fn(pred, gt);
        pred.data[i] = orig;
        const double fd = (lp - lm) / (static_cast<double>(xp) - static_cast<double>(xm));
        const double d = static_cast<double>(analytic.data[i]) - fd;
        num += d * d;
        den += fd * fd;
    }
    return std::sqrt(num) / std::sqrt(std::max(den, 1e-30));
}

struct VerifyScope {
    std::ostream& out;
    int failures = 0;

    void check(bool ok, const std::string& name, const std::string& detail = "") {
        out << (ok ? "PASS " : "FAIL ") << name;
        if (!ok && !detail.empty()) out << " (" << detail << ")";
        out << "\n";
        if (!ok) ++failures;
    }
};

} // namespace

int run_verify(std::ostream& out) {
    VerifyScope v{out};

    { // wavelet round trip + energy conservation
        SplitMix64 rng(11);
        double max_err = 0.0, max_energy_rel = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Tensor img = random_tensor(rng, 3, 64, 64);
            const WaveletPyramid pyr = decompose(img, 4);
            const Tensor rec = reconstruct(pyr);
            for (std::size_t j = 0; j < img.data.size(); ++j) {
                max_err = std::max(max_err, std::fabs(static_cast<double>(rec.data[j]) -
                                                      static_cast<double>(img.data[j])));
            }
            double e_in = 0.0, e_out = 0.0;
            for (float x : img.data) e_in += static_cast<double>(x) * x;
            for (int l = 0; l < pyr.depth(); ++l) {
                const WaveletBand& b = pyr.levels[l];
                for (const Tensor* band : {&b.lh, &b.hl, &b.hh}) {
                    for (float x : band->data) e_out += static_cast<double>(x) * x;
                }
                if (l == pyr.depth() - 1) {
                    for (float x : b.ll.data) e_out += static_cast<double>(x) * x;
                }
            }
            max_energy_rel = std::max(max_energy_rel, std::fabs(e_out - e_in) / e_in);
        }
        v.check(max_err < 1e-6, "wavelet round-trip < 1e-6",
                "max err " + std::to_string(max_err));
        v.check(max_energy_rel < 1e-5, "wavelet energy conservation < 1e-5 rel");
    }

    { // sparse conv equals masked dense conv, bit for bit
        SplitMix64 rng(22);
        bool exact = true;
        for (int i = 0; i < 20 && exact; ++i) {
            const Tensor x = random_tensor(rng, 6, 20, 24, -1.0f, 1.0f);
            const ConvSpec spec = random_conv(rng, 6, 5, 3, 1, 1);
            ValidMask mask(20, 24);
            for (std::uint8_t& b : mask.bits) b = static_cast<std::uint8_t>(rng.next() & 1);
            const Tensor dense = conv2d(x, spec);
            const Tensor sparse = sparse_conv2d(x, mask, spec);
            for (int c = 0; c < dense.channels && exact; ++c) {
                for (int yy = 0; yy < dense.height && exact; ++yy) {
                    for (int xx = 0; xx < dense.width; ++xx) {
                        const float want = mask.at(yy, xx) ? dense.at(c, yy, xx) : 0.0f;
                        if (sparse.at(c, yy, xx) != want) {
                            exact = false;
                            break;
                        }
                    }
                }
            }
        }
        v.check(exact, "sparse conv == mask * dense conv (exact)");
    }

    { // cascade through dilate3 matches the dense cascade at valid positions
        SplitMix64 rng(33);
        bool exact = true;
        for (int i = 0; i < 10 && exact; ++i) {
            const Tensor x = random_tensor(rng, 4, 18, 18, -1.0f, 1.0f);
            const ConvSpec c1 = random_conv(rng, 4, 6, 3, 1, 1);
            const ConvSpec c2 = random_conv(rng, 6, 3, 3, 1, 1);
            ValidMask mask(18, 18);
            for (std::uint8_t& b : mask.bits) b = static_cast<std::uint8_t>(rng.next() % 4 == 0);
            const Tensor y_dense = conv2d(conv2d(x, c1), c2);
            const Tensor y_sparse = sparse_conv2d(sparse_conv2d(x, dilate3(mask), c1), mask, c2);
            for (int c = 0; c < y_dense.channels && exact; ++c) {
                for (int yy = 0; yy < y_dense.height && exact; ++yy) {
                    for (int xx = 0; xx < y_dense.width; ++xx) {
                        if (mask.at(yy, xx) &&
                            y_sparse.at(c, yy, xx) != y_dense.at(c, yy, xx)) {
                            exact = false;
                            break;
                        }
                    }
                }
            }
        }
        v.check(exact, "dilate3 cascade exact at valid positions");
    }

    { // eta monotonicity of densities and charged flops on one pipeline
        const EngineConfig config;
        const NetworkWeights weights = init_weights(config, 7);
        const Triplet t = make_piecewise_triplet(77, 64, 64);
        const MotionResult motion = mpnet_forward(t.frame0, t.frame1, weights, config);
        const ContextPyramid ctx =
            encode_context(t.frame0, t.frame1, motion.estimate, weights, config);
        const std::vector<float> etas{0.0f, 0.0025f, 0.005f, 0.0075f, 0.01f, 0.0125f, 0.015f};
        bool monotone = true;
        double prev_density[3] = {2.0, 2.0, 2.0};
        std::int64_t prev_flops = -1;
        for (float eta : etas) {
            const SynthesisResult r = wsnet_reconstruct(ctx, eta, weights, config);
            out << "  eta " << eta << ": densities " << r.masks[0].density() << " / "
                << r.masks[1].density() << " / " << r.masks[2].density() << ", synthesis FLOPs "
                << r.flops << "\n";
            for (int l = 0; l < 3; ++l) {
                if (r.masks[l].density() > prev_density[l] + 1e-12) monotone = false;
                prev_density[l] = r.masks[l].density();
            }
            if (prev_flops >= 0 && r.flops > prev_flops) monotone = false;
            prev_flops = r.flops;
        }
        v.check(monotone, "mask density and charged FLOPs non-increasing in eta");
    }

    { // gumbel samples stay on the simplex; argmax invariant to logit shifts
        ThresholdPolicy policy;
        policy.probabilities = {0.1f, 0.2f, 0.6f, 0.1f};
        policy.mode = ThresholdPolicy::Mode::kTrainSoft;
        policy.temperature = 0.7f;
        bool simplex = true;
        for (std::uint64_t s = 0; s < 1000; ++s) {
            const ThresholdPolicy sampled = gumbel_sample(policy, s);
            double sum = 0.0;
            for (float hk : sampled.sample) {
                if (hk < 0.0f) simplex = false;
                sum += hk;
            }
            if (std::fabs(sum - 1.0) > 1e-5) simplex = false;
        }
        v.check(simplex, "gumbel samples on the simplex");

        const std::vector<float> logits{0.3f, -1.2f, 2.0f, 0.0f};
        std::vector<float> shifted = logits;
        for (float& x : shifted) x += 5.5f;
        const std::vector<float> p1 = softmax(logits);
        const std::vector<float> p2 = softmax(shifted);
        const auto arg1 = std::max_element(p1.begin(), p1.end()) - p1.begin();
        const auto arg2 = std::max_element(p2.begin(), p2.end()) - p2.begin();
        v.check(arg1 == arg2, "softmax argmax invariant to logit shift");
    }

    { // analytic gradients against central differences
        SplitMix64 rng(44);
        double worst_charb = 0.0, worst_freq = 0.0, worst_census = 0.0;
        for (int i = 0; i < 5; ++i) {
            const Tensor gt = random_tensor(rng, 3, 6, 7);
            // keep |pred - gt| away from the Charbonnier cusp, where the
            // finite-difference oracle itself loses accuracy at step 1e-4
            Tensor pred = gt;
            for (float& v : pred.data) {
                const float mag = rng.uniform_float(0.01f, 0.4f);
                v += (rng.next() & 1) ? mag : -mag;
            }
            const LossResult res = charbonnier(pred, gt);
            worst_charb = std::max(
                worst_charb, gradient_check(pred, gt, res.grad, [](const Tensor& p, const Tensor& g) {
                    return charbonnier(p, g).loss;
                }));
        }
        for (int i = 0; i < 3; ++i) {
            Tensor pred = random_tensor(rng, 1, 8, 8);
            const Tensor gt = random_tensor(rng, 1, 8, 8);
            const WaveletPyramid gp = decompose(gt, 2);
            WaveletPyramid pp = decompose(pred, 2);
            const PyramidLossResult res = frequency_loss(pp, gp);
            // check the level-1 LH band gradient
            Tensor band = pp.levels[0].lh;
            const double err =
                gradient_check(band, gp.levels[0].lh, res.grad.levels[0].lh,
                               [&](const Tensor& b, const Tensor&) {
                                   WaveletPyramid tmp = pp;
                                   tmp.levels[0].lh = b;
                                   return frequency_loss(tmp, gp).loss;
                               });
            worst_freq = std::max(worst_freq, err);
        }
        for (int i = 0; i < 2; ++i) {
            Tensor pred = random_tensor(rng, 3, 12, 12);
            const Tensor gt = random_tensor(rng, 3, 12, 12);
            const LossResult res = census_loss(pred, gt);
            worst_census = std::max(
                worst_census, gradient_check(pred, gt, res.grad, [](const Tensor& p, const Tensor& g) {
                    return census_loss(p, g).loss;
                }));
        }
        v.check(worst_charb < 1e-4, "charbonnier gradient vs finite differences < 1e-4",
                std::to_string(worst_charb));
        v.check(worst_freq < 1e-4, "frequency gradient vs finite differences < 1e-4",
                std::to_string(worst_freq));
        v.check(worst_census < 1e-3, "census gradient vs finite differences < 1e-3",
                std::to_string(worst_census));
    }

    out << (v.failures == 0 ? "verify: all properties hold\n"
                            : "verify: " + std::to_string(v.failures) + " failure(s)\n");
    return v.failures;
}

} // namespace wvfi
