#include "waveletvfi/image_io.hpp"
#include "waveletvfi/kernels.hpp"
#include "waveletvfi/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using namespace wvfi;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << text;
}

int cmd_init_weights(const std::string& out_path, std::uint64_t seed) {
    EngineConfig config;
    config.validate();
    const NetworkWeights weights = init_weights(config, seed);
    save_weights(weights, out_path);
    std::size_t params = 0;
    for (const auto& e : weights.entries) params += e.data.size();
    std::cout << "wrote " << out_path << " (" << weights.entries.size() << " tensors, " << params
              << " parameters, seed " << seed << ")\n";
    return 0;
}

int cmd_interpolate(const std::string& frame0, const std::string& frame1,
                    const std::string& weights_path, const std::string& out_path, double eta,
                    bool dynamic, std::uint64_t seed, const std::string& report_path) {
    const Tensor i0 = load_image(frame0);
    const Tensor i1 = load_image(frame1);
    if (!i0.same_shape(i1)) {
        throw std::runtime_error("input frames disagree on size");
    }

    EngineConfig config;
    config.mode = dynamic ? ThresholdMode::kDynamic : ThresholdMode::kFixed;
    config.fixed_eta = static_cast<float>(eta);
    config.seed = seed;
    config.validate();

    const NetworkWeights weights = load_weights(weights_path);
    weights.validate_against(config);

    const PipelineRun run = run_pipeline(i0, i1, config, weights, seed);
    save_image(run.frame, out_path);

    std::cout << "eta " << run.synthesis.eta_used << ", synthesis FLOPs " << run.synthesis.flops
              << ", mask densities " << run.synthesis.masks[0].density() << "/"
              << run.synthesis.masks[1].density() << "/" << run.synthesis.masks[2].density()
              << ", wrote " << out_path << "\n";

    if (!report_path.empty()) {
        write_text(report_path, interpolate_report_json(run, config, i0.height, i0.width, seed));
        std::cout << "report " << report_path << "\n";
    }
    if (const char* log = std::getenv("WVFI_LOG"); log && std::string(log) == "debug") {
        const FlopsLedger ledger = ledger_for_synthesis(run.synthesis, config);
        for (const FlopsEntry& e : ledger.entries) {
            std::fprintf(stderr, "%-24s dense %12lld  fraction %.4f  charged %12lld\n",
                         e.name.c_str(), static_cast<long long>(e.dense), e.valid_fraction,
                         static_cast<long long>(e.charged));
        }
        std::fprintf(stderr, "ledger total %lld\n", static_cast<long long>(ledger.total));
    }
    return 0;
}

Tensor visualize_band(const Tensor& band, bool low_pass, int level) {
    Tensor vis(3, band.height, band.width);
    if (low_pass) {
        // LL gains a factor 2 per level; rescale into [0, 1]
        const float s = 1.0f / static_cast<float>(1 << level);
        for (int c = 0; c < 3; ++c) {
            const float* src = band.plane(std::min(c, band.channels - 1));
            float* dst = vis.plane(c);
            for (int i = 0; i < band.plane_size(); ++i) {
                dst[i] = std::clamp(src[i] * s, 0.0f, 1.0f);
            }
        }
    } else {
        float max_abs = 1e-6f;
        for (float v : band.data) max_abs = std::max(max_abs, std::fabs(v));
        for (int c = 0; c < 3; ++c) {
            const float* src = band.plane(std::min(c, band.channels - 1));
            float* dst = vis.plane(c);
            for (int i = 0; i < band.plane_size(); ++i) {
                dst[i] = std::clamp(0.5f + 0.5f * src[i] / max_abs, 0.0f, 1.0f);
            }
        }
    }
    return vis;
}

int cmd_decompose(const std::string& image_path, int levels, const std::string& out_dir) {
    const Tensor image = load_image(image_path);
    const int div = 1 << levels;
    if (image.height % div != 0 || image.width % div != 0) {
        throw std::runtime_error("image dims must be divisible by 2^levels for decompose");
    }
    std::filesystem::create_directories(out_dir);
    const WaveletPyramid pyr = decompose(image, levels);
    for (int l = 1; l <= pyr.depth(); ++l) {
        const WaveletBand& band = pyr.levels[l - 1];
        const std::string base = out_dir + "/level" + std::to_string(l) + "_";
        save_image(visualize_band(band.ll, true, l), base + "ll.png");
        save_image(visualize_band(band.lh, false, l), base + "lh.png");
        save_image(visualize_band(band.hl, false, l), base + "hl.png");
        save_image(visualize_band(band.hh, false, l), base + "hh.png");
    }
    std::cout << "wrote " << 4 * pyr.depth() << " coefficient images under " << out_dir << "\n";
    return 0;
}

int cmd_bench(const std::string& dir, std::vector<double> etas, const std::string& weights_path,
              const std::string& report_path) {
    EngineConfig config;
    config.validate();
    const NetworkWeights weights = load_weights(weights_path);
    weights.validate_against(config);

    std::vector<float> etas_f;
    if (etas.empty()) {
        etas_f = {0.0f, 0.0025f, 0.005f, 0.0075f, 0.01f, 0.0125f, 0.015f};
    } else {
        for (double e : etas) etas_f.push_back(static_cast<float>(e));
    }

    const BenchReport report = run_bench(dir, etas_f, config, weights);
    std::printf("%-8s %-10s %-8s %-14s %s\n", "eta", "PSNR", "SSIM", "FLOPs", "densities(l1/l2/l3)");
    for (const BenchRow& r : report.aggregate) {
        std::printf("%-8.4f %-10.4f %-8.4f %-14lld %.3f/%.3f/%.3f\n", r.eta, r.psnr, r.ssim,
                    static_cast<long long>(r.flops_total), r.mask_density[0], r.mask_density[1],
                    r.mask_density[2]);
    }
    if (!report_path.empty()) {
        write_text(report_path, bench_report_json(report));
        std::cout << "report " << report_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"WaveletVFI: frame interpolation in the wavelet domain"};
    app.require_subcommand(1);

    // init-weights
    auto* init = app.add_subcommand("init-weights", "write deterministically initialized weights");
    std::string init_out;
    std::uint64_t init_seed = 1;
    init->add_option("--out", init_out, "output .wvfi file")->required();
    init->add_option("--seed", init_seed, "initialization seed");

    // interpolate
    auto* interp = app.add_subcommand("interpolate", "synthesize the midpoint frame");
    std::string frame0, frame1, weights_path, out_path, report_path;
    double eta = 0.0;
    bool dynamic = false;
    std::uint64_t seed = 1;
    interp->add_option("--frame0", frame0, "first input frame")->required();
    interp->add_option("--frame1", frame1, "second input frame")->required();
    interp->add_option("--weights", weights_path, "weight file")->required();
    interp->add_option("--out", out_path, "output image path")->required();
    auto* eta_opt = interp->add_option("--eta", eta, "fixed compression threshold ratio");
    auto* dyn_opt = interp->add_flag("--dynamic", dynamic, "classifier-selected threshold");
    eta_opt->excludes(dyn_opt);
    dyn_opt->excludes(eta_opt);
    interp->add_option("--seed", seed, "seed for sampling");
    interp->add_option("--report", report_path, "write a JSON report here");

    // decompose
    auto* dec = app.add_subcommand("decompose", "write per-level wavelet coefficient images");
    std::string dec_image, dec_out;
    int dec_levels = 4;
    dec->add_option("--image", dec_image, "input image")->required();
    dec->add_option("--levels", dec_levels, "decomposition depth")->check(CLI::Range(1, 6));
    dec->add_option("--out-dir", dec_out, "output directory")->required();

    // verify
    app.add_subcommand("verify", "run the property suite");

    // bench
    auto* bench = app.add_subcommand("bench", "eta sweep over a triplet directory");
    std::string bench_dir, bench_weights, bench_report;
    std::vector<double> bench_etas;
    bench->add_option("--dir", bench_dir, "directory of <name>/frame0,frame1,gt triplets")
        ->required();
    bench->add_option("--etas", bench_etas, "eta values to sweep")->delimiter(',');
    bench->add_option("--weights", bench_weights, "weight file")->required();
    bench->add_option("--report", bench_report, "write a JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("init-weights")) {
            return cmd_init_weights(init_out, init_seed);
        }
        if (app.got_subcommand("interpolate")) {
            return cmd_interpolate(frame0, frame1, weights_path, out_path, eta, dynamic, seed,
                                   report_path);
        }
        if (app.got_subcommand("decompose")) {
            return cmd_decompose(dec_image, dec_levels, dec_out);
        }
        if (app.got_subcommand("verify")) {
            return wvfi::run_verify(std::cout) == 0 ? 0 : 1;
        }
        if (app.got_subcommand("bench")) {
            return cmd_bench(bench_dir, bench_etas, bench_weights, bench_report);
        }
    } catch (const std::exception& e) {
        std::cerr << "wvfi: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
